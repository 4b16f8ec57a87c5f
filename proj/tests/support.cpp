#include "support.hpp"

#include <conereg/cones.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifndef FIXTURE_DIR
#define FIXTURE_DIR "/root/proj/fixtures"
#endif

namespace testsupport {

namespace {

// Largest absolute entry, floored at `floor_at` so relative tolerances stay
// meaningful on all-zero data.
double max_abs(const Matrix& m, double floor_at = 1.0) {
    double v = floor_at;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) v = std::max(v, std::abs(m(i, j)));
    return v;
}

// Solve the tall consistent system M x = r (M is rows x k, rows >= k) by
// elimination. Returns nullopt when the columns are dependent or the system
// is inconsistent.
std::optional<Vector> solve_tall(Matrix M, Vector r, double rel_tol) {
    const int rows = int(M.rows());
    const int k = int(M.cols());
    const double scale = std::max(max_abs(M), max_abs(r));
    const double tol = rel_tol * scale;
    std::vector<int> pivot_row(k, -1);
    int next = 0;
    for (int col = 0; col < k; ++col) {
        int best = -1;
        double best_abs = tol;
        for (int i = next; i < rows; ++i) {
            if (std::abs(M(i, col)) > best_abs) {
                best_abs = std::abs(M(i, col));
                best = i;
            }
        }
        if (best < 0) return std::nullopt;  // dependent columns
        M.row(next).swap(M.row(best));
        std::swap(r(next), r(best));
        for (int i = next + 1; i < rows; ++i) {
            const double f = M(i, col) / M(next, col);
            M.row(i) -= f * M.row(next);
            r(i) -= f * r(next);
        }
        pivot_row[col] = next;
        ++next;
    }
    for (int i = next; i < rows; ++i) {
        if (std::abs(r(i)) > 1e3 * tol) return std::nullopt;  // inconsistent
    }
    Vector x = Vector::Zero(k);
    for (int col = k - 1; col >= 0; --col) {
        const int pr = pivot_row[col];
        double acc = r(pr);
        for (int j = col + 1; j < k; ++j) acc -= M(pr, j) * x(j);
        x(col) = acc / M(pr, col);
    }
    return x;
}

// Visit every size-k subset of {0, ..., n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
    if (k < 0 || k > n) return;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

void push_unique(std::vector<Vector>& out, const Vector& v, double tol = 1e-7) {
    for (const Vector& u : out) {
        if ((u - v).lpNorm<Eigen::Infinity>() <= tol) return;
    }
    out.push_back(v);
}

// Basic feasible solutions of { x >= 0 : A x = b }: every vertex is the
// unique solution of a consistent subsystem on rank(A) independent columns.
std::vector<Vector> basic_points(const Matrix& A, const Vector& b) {
    const int n = int(A.cols());
    const int r = ge_rank(A);
    const double bscale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    std::vector<Vector> out;
    if (r == 0) {
        if (b.lpNorm<Eigen::Infinity>() <= 1e-9 * bscale) out.push_back(Vector::Zero(n));
        return out;
    }
    for_each_subset(n, r, [&](const std::vector<int>& cols) {
        Matrix sub(A.rows(), r);
        for (int j = 0; j < r; ++j) sub.col(j) = A.col(cols[j]);
        std::optional<Vector> xs = solve_tall(sub, b, 1e-11);
        if (!xs) return;
        for (int j = 0; j < r; ++j)
            if ((*xs)(j) < -1e-9) return;
        Vector x = Vector::Zero(n);
        for (int j = 0; j < r; ++j) x(cols[j]) = std::max(0.0, (*xs)(j));
        if ((A * x - b).lpNorm<Eigen::Infinity>() > 1e-7 * bscale) return;
        push_unique(out, x);
    });
    return out;
}

}  // namespace

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

std::optional<Vector> ge_solve(Matrix M, Vector r, double piv_tol) {
    if (M.rows() != M.cols() || M.rows() != r.size())
        throw std::invalid_argument("ge_solve: square system required");
    return solve_tall(std::move(M), std::move(r), piv_tol / max_abs(M));
}

int ge_rank(Matrix M, double piv_tol) {
    const int rows = int(M.rows());
    const int cols = int(M.cols());
    const double tol = piv_tol * max_abs(M);
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int best = -1;
        double best_abs = tol;
        for (int i = rank; i < rows; ++i) {
            if (std::abs(M(i, col)) > best_abs) {
                best_abs = std::abs(M(i, col));
                best = i;
            }
        }
        if (best < 0) continue;
        M.row(rank).swap(M.row(best));
        for (int i = rank + 1; i < rows; ++i) {
            const double f = M(i, col) / M(rank, col);
            M.row(i) -= f * M.row(rank);
        }
        ++rank;
    }
    return rank;
}

std::vector<Vector> oracle_extreme_points(const Matrix& A, const Vector& b) {
    return basic_points(A, b);
}

std::vector<Vector> oracle_truncated_vertices(const Matrix& A, const Vector& b,
                                              double R) {
    const int m = int(A.rows());
    const int n = int(A.cols());
    Matrix lifted = Matrix::Zero(m + 1, n + 1);
    lifted.topLeftCorner(m, n) = A;
    lifted.row(m).head(n).setOnes();
    lifted(m, n) = 1.0;
    Vector rhs(m + 1);
    rhs.head(m) = b;
    rhs(m) = R;
    std::vector<Vector> lifted_pts = basic_points(lifted, rhs);
    std::vector<Vector> out;
    for (const Vector& v : lifted_pts) push_unique(out, v.head(n));
    return out;
}

std::vector<int> oracle_forced_zeros(const Matrix& A, const Vector& b, double R,
                                     double tol) {
    std::vector<Vector> verts = oracle_truncated_vertices(A, b, R);
    std::vector<int> forced;
    if (verts.empty()) return forced;  // infeasible: no coordinate is witnessed
    for (int j = 0; j < int(A.cols()); ++j) {
        double best = 0.0;
        for (const Vector& v : verts) best = std::max(best, v(j));
        if (best <= tol) forced.push_back(j);
    }
    return forced;
}

bool oracle_orthant_slater(const Matrix& A, const Vector& b) {
    std::vector<Vector> verts = oracle_truncated_vertices(A, b, 1e4);
    if (verts.empty()) return false;
    for (int j = 0; j < int(A.cols()); ++j) {
        double best = 0.0;
        for (const Vector& v : verts) best = std::max(best, v(j));
        if (best <= 1e-7) return false;
    }
    return true;
}

double urand(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& gen) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = dist(gen);
    return m;
}

Matrix random_symmetric(int n, std::mt19937_64& gen) {
    Matrix g = gaussian_matrix(n, n, gen);
    return Matrix(0.5 * (g + g.transpose()));
}

Matrix random_orthogonal(int n, std::mt19937_64& gen) {
    Matrix g = gaussian_matrix(n, n, gen);
    Eigen::HouseholderQR<Matrix> qr(g);
    return Matrix(qr.householderQ());
}

OrthantInstance make_failing_orthant(int n, int m, unsigned seed) {
    if (n < 2 || m < 1)
        throw std::invalid_argument("make_failing_orthant: need n >= 2, m >= 1");
    std::mt19937_64 gen(seed);
    for (int attempt = 0; attempt < 50; ++attempt) {
        Matrix A = gaussian_matrix(m, n, gen);
        Vector y = gaussian_matrix(m, 1, gen);
        const double ysq = y.squaredNorm();
        if (ysq < 1e-3) continue;

        const int zcount = 1 + int(gen() % unsigned(n - 1));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), gen);
        std::vector<int> forced(order.begin(), order.begin() + zcount);
        std::sort(forced.begin(), forced.end());
        std::vector<bool> is_forced(n, false);
        for (int j : forced) is_forced[j] = true;

        // Shape A^T y: strictly positive (>= 0.05) on forced coordinates,
        // exactly zero elsewhere.
        for (int j = 0; j < n; ++j) {
            const double w0 = A.col(j).dot(y);
            if (is_forced[j]) {
                if (w0 < 0.05) A.col(j) += ((0.05 + urand(gen, 0.0, 0.45) - w0) / ysq) * y;
            } else {
                A.col(j) -= (w0 / ysq) * y;
            }
        }

        Vector x = Vector::Zero(n);
        for (int j = 0; j < n; ++j)
            if (!is_forced[j]) x(j) = urand(gen, 0.2, 1.0);
        Vector b = A * x;

        if (oracle_forced_zeros(A, b) != forced) continue;  // plant not clean

        OrthantInstance inst;
        inst.A = std::move(A);
        inst.b = std::move(b);
        inst.x_feas = std::move(x);
        inst.forced = std::move(forced);
        inst.y_star = std::move(y);
        return inst;
    }
    throw std::runtime_error("make_failing_orthant: no clean plant after 50 attempts");
}

OrthantInstance make_slater_orthant(int n, int m, unsigned seed) {
    if (n < 1 || m < 1)
        throw std::invalid_argument("make_slater_orthant: need n >= 1, m >= 1");
    std::mt19937_64 gen(seed);
    for (int attempt = 0; attempt < 50; ++attempt) {
        Matrix A = gaussian_matrix(m, n, gen);
        Vector x(n);
        for (int j = 0; j < n; ++j) x(j) = urand(gen, 0.2, 1.0);
        Vector b = A * x;
        if (!oracle_orthant_slater(A, b)) continue;
        OrthantInstance inst;
        inst.A = std::move(A);
        inst.b = std::move(b);
        inst.x_feas = std::move(x);
        inst.y_star = Vector::Zero(m);
        return inst;
    }
    throw std::runtime_error("make_slater_orthant: no clean plant after 50 attempts");
}

PsdInstance make_failing_psd(int n, int m, unsigned seed) {
    if (n < 2 || m < 1)
        throw std::invalid_argument("make_failing_psd: need n >= 2, m >= 1");
    std::mt19937_64 gen(seed);
    const int sd = conereg::svec_dim(n);

    const int r = 1 + int(gen() % unsigned(n - 1));  // rank of the exposing matrix
    Matrix Q = random_orthogonal(n, gen);
    Vector lam = Vector::Zero(n);
    for (int i = 0; i < r; ++i) lam(i) = urand(gen, 0.4, 1.2);
    Matrix W = Q * lam.asDiagonal() * Q.transpose();
    W = 0.5 * (W + W.transpose());
    Matrix V2 = Q.rightCols(n - r);

    // Relative-interior point of the face cut out by W: V2 P V2^T with P
    // positive definite.
    Matrix G = gaussian_matrix(n - r, n - r, gen);
    Matrix P = G * G.transpose() + 0.3 * Matrix::Identity(n - r, n - r);
    Matrix X = V2 * P * V2.transpose();
    X = 0.5 * (X + X.transpose());

    Vector y = gaussian_matrix(m, 1, gen);
    while (std::abs(y(0)) < 0.3) y(0) = urand(gen, -1.5, 1.5);

    std::vector<Matrix> mats(m);
    for (int i = 1; i < m; ++i) mats[i] = random_symmetric(n, gen);
    Matrix A1 = W;
    for (int i = 1; i < m; ++i) A1 -= y(i) * mats[i];
    A1 /= y(0);
    mats[0] = 0.5 * (A1 + A1.transpose());

    Matrix A(m, sd);
    for (int i = 0; i < m; ++i) A.row(i) = conereg::svec(mats[i]).transpose();
    Vector b = A * conereg::svec(X);

    PsdInstance inst;
    inst.n = n;
    inst.A = std::move(A);
    inst.b = std::move(b);
    inst.X_feas = std::move(X);
    inst.y_star = std::move(y);
    inst.W_star = std::move(W);
    inst.w_rank = r;
    return inst;
}

PsdInstance make_slater_psd(int n, int m, unsigned seed) {
    if (n < 1 || m < 1)
        throw std::invalid_argument("make_slater_psd: need n >= 1, m >= 1");
    std::mt19937_64 gen(seed);
    const int sd = conereg::svec_dim(n);
    Matrix G = gaussian_matrix(n, n, gen);
    Matrix X = 0.5 * G * G.transpose() + 0.4 * Matrix::Identity(n, n);
    X = 0.5 * (X + X.transpose());
    Matrix A(m, sd);
    for (int i = 0; i < m; ++i) A.row(i) = conereg::svec(random_symmetric(n, gen)).transpose();
    Vector b = A * conereg::svec(X);

    PsdInstance inst;
    inst.n = n;
    inst.A = std::move(A);
    inst.b = std::move(b);
    inst.X_feas = std::move(X);
    inst.y_star = Vector::Zero(m);
    inst.W_star = Matrix::Zero(n, n);
    inst.w_rank = 0;
    return inst;
}

}  // namespace testsupport
