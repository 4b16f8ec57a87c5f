// Auxiliary-system certificates: verification, the LP and eigenvalue solver
// routes, and the general candidate/lattice search. Verdicts are checked
// against the independent polyhedral oracle wherever it applies.
#include <conereg/auxcert.hpp>

#include <conereg/feasibility.hpp>
#include <conereg/io.hpp>

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "support.hpp"

using namespace conereg;

namespace {

ConicSystem orthant_system(const Matrix& A, const Vector& b) {
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Orthant, int(A.cols())});
    return make_system(spec, A, b);
}

ConicSystem psd_system(int n, const Matrix& A, const Vector& b) {
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Psd, n});
    return make_system(spec, A, b);
}

Matrix e_mat(int n, int i, int j) {
    Matrix m = Matrix::Zero(n, n);
    m(i, j) = m(j, i) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("make_system validates shapes and records surjectivity") {
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Orthant, 3});
    CHECK_THROWS_AS(make_system(spec, Matrix::Ones(1, 2), Vector::Zero(1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_system(spec, Matrix::Ones(2, 3), Vector::Zero(1)),
                    std::invalid_argument);

    Matrix dup(2, 3);
    dup << 1, 1, 1, 2, 2, 2;  // dependent rows
    const ConicSystem sys = make_system(spec, dup, Vector::Zero(2));
    CHECK(!sys.surjective);
    CHECK(make_system(spec, Matrix::Identity(3, 3).topRows(2), Vector::Zero(2)).surjective);
}

TEST_CASE("verify_certificate on the exponential fixture") {
    const ParsedProblem pp = load_problem(testsupport::fixture_path("exp_example.json"));
    const ConicSystem& sys = pp.system;

    // y = (1,0) exposes (0,1,0), dual-feasible for the exponential cone.
    const ExposingCertificate c1 = verify_certificate(sys, Vector{{1.0, 0.0}});
    CHECK(c1.w.vec(0)(0) == doctest::Approx(0.0));
    CHECK(c1.w.vec(0)(1) == doctest::Approx(1.0));
    CHECK(c1.w.vec(0)(2) == doctest::Approx(0.0));
    CHECK(c1.nontrivial);
    CHECK(std::abs(c1.b_pairing) <= 1e-12);

    // After the first reduction the halfplane face accepts y = (-1,-1),
    // whose image (-1,0,0) pairs to zero with the face span's nonnegative part.
    ConicSystem reduced = sys;
    Point w1;
    w1.blocks.push_back(Vector{{0.0, 1.0, 0.0}});
    reduced.current_face = intersect_with_exposed(sys.cone, sys.current_face, w1);
    const ExposingCertificate c2 = verify_certificate(reduced, Vector{{-1.0, -1.0}});
    CHECK(c2.w.vec(0)(0) == doctest::Approx(-1.0));
    CHECK(c2.nontrivial);

    // The full cone rejects any multiplier with a nonzero second coordinate.
    CHECK_THROWS_AS(verify_certificate(sys, Vector{{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(verify_certificate(sys, Vector{{0.3, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(verify_certificate(sys, Vector{{-1.0, -1.0}}), std::invalid_argument);
}

TEST_CASE("verify_certificate normalization and scaling invariance") {
    const Matrix A = Matrix::Ones(1, 2);
    const ConicSystem sys = orthant_system(A, Vector::Zero(1));
    const ExposingCertificate base = verify_certificate(sys, Vector{{1.0}});
    CHECK(base.y(0) == doctest::Approx(1.0));
    const ExposingCertificate scaled = verify_certificate(sys, Vector{{42.0}});
    CHECK((scaled.y - base.y).norm() <= 1e-14);  // sup-norm normalized
    // A sign flip leaves the dual cone; positive rescaling only.
    CHECK_THROWS_AS(verify_certificate(sys, Vector{{-1.0}}), std::invalid_argument);

    // Nonzero <b,y> is rejected with the pairing condition named.
    const ConicSystem bad = orthant_system(Matrix::Identity(2, 2), Vector{{1.0, 0.0}});
    CHECK_THROWS_AS(verify_certificate(bad, Vector{{1.0, 0.0}}), std::invalid_argument);
    CHECK_NOTHROW(verify_certificate(bad, Vector{{0.0, 1.0}}));
}

TEST_CASE("verify_certificate rejects face-trivial multipliers") {
    // Both rows expose only the dead part of the current face: w = E22 while
    // the face span is e1, so the certificate cannot cut anything.
    ConicSystem sys = psd_system(2, Matrix(svec(e_mat(2, 1, 1)).transpose()), Vector::Zero(1));
    Matrix basis = Matrix::Zero(2, 1);
    basis(0, 0) = 1.0;
    sys.current_face.blocks[0] = PsdFace{basis};
    CHECK_THROWS_AS(verify_certificate(sys, Vector{{1.0}}), std::invalid_argument);
}

TEST_CASE("solve_orthant decides the stock examples") {
    // x1 + x2 = 0 on the orthant forces x = 0.
    const SlaterVerdict fails = solve_orthant(orthant_system(Matrix::Ones(1, 2), Vector::Zero(1)));
    REQUIRE(fails.status == SlaterStatus::Fails);
    REQUIRE(fails.certificate.has_value());
    CHECK(fails.certificate->y(0) == doctest::Approx(1.0));
    CHECK(fails.certificate->w.vec(0).minCoeff() > 0.9);

    // x1 + x2 = 1 has the strictly positive witness.
    const SlaterVerdict feas = solve_orthant(orthant_system(Matrix::Ones(1, 2), Vector::Ones(1)));
    REQUIRE(feas.status == SlaterStatus::StrictlyFeasible);
    REQUIRE(feas.witness.has_value());
    CHECK(feas.witness->vec(0).minCoeff() > 0.0);
    CHECK(std::abs(feas.witness->vec(0).sum() - 1.0) <= 1e-7);

    // x = (1, 0) pinned by identity equalities: only x2 is forced.
    const SlaterVerdict pin =
        solve_orthant(orthant_system(Matrix::Identity(2, 2), Vector{{1.0, 0.0}}));
    REQUIRE(pin.status == SlaterStatus::Fails);
    REQUIRE(pin.certificate.has_value());
    CHECK(pin.certificate->y(0) == doctest::Approx(0.0));
    CHECK(pin.certificate->y(1) == doctest::Approx(1.0));
}

TEST_CASE("solve_orthant never contradicts the brute-force oracle") {
    int fails_seen = 0, slater_seen = 0;
    for (int i = 0; i < 60; ++i) {
        const int n = 2 + (i % 5), m = 1 + (i % 4);
        const testsupport::OrthantInstance inst =
            (i % 2 == 0) ? testsupport::make_failing_orthant(n, m, 500 + i)
                         : testsupport::make_slater_orthant(n, m, 500 + i);
        const bool oracle_slater = testsupport::oracle_orthant_slater(inst.A, inst.b);
        const SlaterVerdict v = solve_orthant(orthant_system(inst.A, inst.b));
        if (v.status == SlaterStatus::Fails) {
            CHECK(!oracle_slater);
            ++fails_seen;
        } else if (v.status == SlaterStatus::StrictlyFeasible) {
            CHECK(oracle_slater);
            ++slater_seen;
        }
    }
    // The LP route is decisive on this scale: no Undetermined expected.
    CHECK(fails_seen == 30);
    CHECK(slater_seen == 30);
}

TEST_CASE("solve_psd decides the stock examples") {
    // <E22,X> = 0 and <E11,X> = 1: the feasible set is {E11}, X22 forced out.
    Matrix A(2, svec_dim(2));
    A.row(0) = svec(e_mat(2, 1, 1)).transpose();
    A.row(1) = svec(e_mat(2, 0, 0)).transpose();
    const SlaterVerdict fails = solve_psd(psd_system(2, A, Vector{{0.0, 1.0}}));
    REQUIRE(fails.status == SlaterStatus::Fails);
    REQUIRE(fails.certificate.has_value());
    CHECK(fails.certificate->y(0) == doctest::Approx(1.0));
    CHECK(std::abs(fails.certificate->y(1)) <= 1e-9);
    CHECK((fails.certificate->w.mat(0) - e_mat(2, 1, 1)).norm() <= 1e-7);

    // trace(X) = 1 is strictly feasible (witness I/2 or similar PD point).
    Matrix tr(1, svec_dim(2));
    tr.row(0) = svec(Matrix(Matrix::Identity(2, 2))).transpose();
    const ConicSystem trace_one = psd_system(2, tr, Vector::Ones(1));
    const SlaterVerdict feas = solve_psd(trace_one);
    REQUIRE(feas.status == SlaterStatus::StrictlyFeasible);
    REQUIRE(feas.witness.has_value());
    CHECK(in_relative_interior(trace_one.cone, *feas.witness));

    // Single equality <E11,X> = 0 exposes E11.
    const SlaterVerdict single =
        solve_psd(psd_system(2, Matrix(svec(e_mat(2, 0, 0)).transpose()), Vector::Zero(1)));
    REQUIRE(single.status == SlaterStatus::Fails);
    CHECK(single.certificate->y(0) == doctest::Approx(1.0));
    CHECK((single.certificate->w.mat(0) - e_mat(2, 0, 0)).norm() <= 1e-7);
}

TEST_CASE("solve_psd separates planted failing from planted Slater instances") {
    for (int i = 0; i < 10; ++i) {
        const testsupport::PsdInstance bad = testsupport::make_failing_psd(2 + (i % 3), 1 + (i % 4), 700 + i);
        const SlaterVerdict vb = solve_auto(psd_system(bad.n, bad.A, bad.b));
        CHECK(vb.status == SlaterStatus::Fails);
        if (vb.certificate) CHECK_NOTHROW(verify_certificate(psd_system(bad.n, bad.A, bad.b), vb.certificate->y));

        const testsupport::PsdInstance good = testsupport::make_slater_psd(2 + (i % 3), 1 + (i % 4), 800 + i);
        const SlaterVerdict vg = solve_auto(psd_system(good.n, good.A, good.b));
        REQUIRE(vg.status == SlaterStatus::StrictlyFeasible);
        REQUIRE(vg.witness.has_value());
        const ConicSystem gs = psd_system(good.n, good.A, good.b);
        CHECK(in_relative_interior(gs.cone, *vg.witness));
        const Vector amb = point_to_ambient(gs.cone, *vg.witness);
        CHECK((gs.A * amb - gs.b).lpNorm<Eigen::Infinity>() <=
              1e-6 * std::max(1.0, gs.b.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("search_certificate_general covers the exponential example") {
    const ParsedProblem pp = load_problem(testsupport::fixture_path("exp_example.json"));

    // Candidate-driven: the provided multiplier is verified and returned.
    AuxOptions with_candidates;
    with_candidates.candidates = {Vector{{1.0, 0.0}}};
    const SlaterVerdict vc = search_certificate_general(pp.system, with_candidates);
    REQUIRE(vc.status == SlaterStatus::Fails);
    CHECK((vc.certificate->y - Vector{{1.0, 0.0}}).norm() <= 1e-12);

    // Lattice-driven: the multiplier is unique up to positive scaling, so the
    // search must land on exactly (1,0) after normalization.
    const SlaterVerdict vl = search_certificate_general(pp.system, {});
    REQUIRE(vl.status == SlaterStatus::Fails);
    CHECK((vl.certificate->y - Vector{{1.0, 0.0}}).norm() <= 1e-9);

    // The general search can reject Slater for no instance: a strictly
    // feasible system exhausts the lattice and stays Undetermined.
    const SlaterVerdict vs =
        search_certificate_general(orthant_system(Matrix::Ones(1, 2), Vector::Ones(1)), {});
    CHECK(vs.status == SlaterStatus::Undetermined);
}

TEST_CASE("certificates imply feasible points live in the exposed hyperplane") {
    for (int i = 0; i < 8; ++i) {
        const testsupport::OrthantInstance inst = testsupport::make_failing_orthant(4, 2, 900 + i);
        const ConicSystem sys = orthant_system(inst.A, inst.b);
        const SlaterVerdict v = solve_orthant(sys);
        REQUIRE(v.status == SlaterStatus::Fails);
        const Vector w = point_to_ambient(sys.cone, v.certificate->w);
        const std::vector<Point> pts = sample_feasible(sys, 50, 40 + i);
        REQUIRE(!pts.empty());
        for (const Point& p : pts) {
            const Vector x = point_to_ambient(sys.cone, p);
            CHECK(std::abs(x.dot(w)) <= 1e-6 * std::max(1.0, x.norm() * w.norm()));
        }
    }
}

TEST_CASE("certificate_pool entries are verified and distinct") {
    // Two independent forced coordinates give room for several multipliers.
    Matrix A = Matrix::Zero(2, 4);
    A(0, 0) = 1.0;
    A(1, 1) = 1.0;
    const ConicSystem sys = orthant_system(A, Vector::Zero(2));
    const std::vector<ExposingCertificate> pool = certificate_pool(sys, {});
    REQUIRE(pool.size() >= 2);
    for (const ExposingCertificate& c : pool) CHECK_NOTHROW(verify_certificate(sys, c.y));
    bool found_distinct = false;
    for (std::size_t i = 0; i + 1 < pool.size() && !found_distinct; ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j)
            if ((pool[i].y - pool[j].y).lpNorm<Eigen::Infinity>() > 1e-6) {
                found_distinct = true;
                break;
            }
    CHECK(found_distinct);
}

TEST_CASE("face_restrict re-expresses the equalities on the face span") {
    const ParsedProblem pp = load_problem(testsupport::fixture_path("exp_example.json"));
    ConicSystem sys = pp.system;
    Point w1;
    w1.blocks.push_back(Vector{{0.0, 1.0, 0.0}});
    sys.current_face = intersect_with_exposed(sys.cone, sys.current_face, w1);

    const RestrictedView view = face_restrict(sys);
    CHECK(view.A.rows() == 2);
    CHECK(view.A.cols() == 2);  // halfplane span is 2-dimensional
    CHECK((Matrix(view.basis.transpose() * view.basis) - Matrix::Identity(2, 2)).norm() <= 1e-12);
    CHECK((view.A - sys.A * view.basis).norm() <= 1e-12);
    REQUIRE(view.cone.blocks.size() == 1);
    CHECK(view.cone.blocks[0].kind == ConeClass::Orthant);  // halfplane ~ R^2_+ x {0}
}
