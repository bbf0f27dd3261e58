#include "test_helpers.hpp"

#include <algorithm>

using namespace qlab;
using Catch::Matchers::WithinAbs;

namespace {

double linear_gap_oracle() {
  const double a = std::sqrt(0.5), b = std::sqrt(0.3), c = std::sqrt(0.2);
  return 0.5 - a / (a + b + c);
}

StateVector schmidt_pair(double c1, double c2) {
  CVector v = CVector::Zero(4);
  v[0] = c1;
  v[3] = c2;
  return StateVector(v);
}

}  // namespace

TEST_CASE("attach_context", "[composite]") {
  const auto e = OrthonormalBasis::standard(3);

  SECTION("basis state") {
    const auto st = attach_context(StateVector::basis_state(3, 0), e, e);
    CVector expected = CVector::Zero(9);
    expected[0] = 1.0;
    CHECK((st.joint.components() - expected).norm() < 1e-15);
  }

  SECTION("three-branch state") {
    const auto psi = test::reference_state();
    const auto st = attach_context(psi, e, e);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK_THAT(std::abs(st.joint[static_cast<Eigen::Index>(st.correlated_index(i))] - psi[static_cast<Eigen::Index>(i)]),
                 WithinAbs(0.0, 1e-15));
    }
    CHECK(st.reconstruction_error() < 1e-10);
  }

  SECTION("Schmidt coefficients are the sorted moduli") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto psi = haar_state(4, s);
      const auto basis = haar_basis(4, s + 1);
      const auto st = attach_context(psi, basis, haar_basis(4, s + 2));
      const auto form = schmidt_decompose(st.joint, st.space());
      std::vector<double> moduli;
      for (Eigen::Index i = 0; i < 4; ++i) moduli.push_back(std::abs(st.coefficients[i]));
      std::sort(moduli.rbegin(), moduli.rend());
      REQUIRE(form.rank() == 4);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK_THAT(form.coefficients[static_cast<Eigen::Index>(i)], WithinAbs(moduli[i], 1e-12));
      }
      CHECK(st.reconstruction_error() < 1e-10);
    }
  }

  SECTION("pointer space larger than the system") {
    const CMatrix pointers = haar_basis(5, 3).matrix().leftCols(3);
    const auto st = attach_context(test::reference_state(), e, pointers);
    CHECK(st.pointer_dim() == 5);
    CHECK(st.reconstruction_error() < 1e-10);
  }

  REQUIRE_THROWS_AS(attach_context(test::reference_state(), e, CMatrix(CMatrix::Identity(3, 2))), DimensionError);
  REQUIRE_THROWS_AS(attach_context(test::reference_state(), e, CMatrix(CMatrix::Identity(2, 3))), DimensionError);
  CMatrix skew = CMatrix::Identity(3, 3);
  skew(0, 1) = 0.5;
  REQUIRE_THROWS_AS(attach_context(test::reference_state(), e, skew), RankDeficiencyError);
}

TEST_CASE("joint_distribution", "[composite]") {
  const auto e2 = OrthonormalBasis::standard(2);
  const auto e3 = OrthonormalBasis::standard(3);

  SECTION("product basis state is one-hot") {
    const auto joint = tensor_product(StateVector::basis_state(2, 0), StateVector::basis_state(3, 1));
    const auto p = joint_distribution(FrameRule::born(), joint, e2, e3);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 3);
    expected(0, 1) = 1.0;
    CHECK((p - expected).norm() < 1e-15);
  }

  SECTION("product states factorize") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto u = haar_state(3, s);
      const auto v = haar_state(4, s + 100);
      const auto a = haar_basis(3, s + 200);
      const auto b = haar_basis(4, s + 300);
      const auto p = joint_distribution(FrameRule::born(), tensor_product(u, v), a, b);
      const CVector cu = amplitudes(u, a);
      const CVector cv = amplitudes(v, b);
      for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index k = 0; k < 4; ++k) CHECK_THAT(p(i, k), WithinAbs(std::norm(cu[i]) * std::norm(cv[k]), 1e-12));
      }
      const auto pu = evaluate(FrameRule::born(), u, a);
      const Eigen::VectorXd rows = p.rowwise().sum();
      for (Eigen::Index i = 0; i < 3; ++i) CHECK_THAT(rows[i], WithinAbs(pu[static_cast<std::size_t>(i)], 1e-10));
    }
  }

  SECTION("Schmidt state is diagonal") {
    const auto p = joint_distribution(FrameRule::born(), schmidt_pair(0.8, 0.6), e2, e2);
    CHECK_THAT(p(0, 0), WithinAbs(0.64, 1e-15));
    CHECK_THAT(p(1, 1), WithinAbs(0.36, 1e-15));
    CHECK(p(0, 1) == 0.0);
    CHECK(p(1, 0) == 0.0);
  }

  REQUIRE_THROWS_AS(joint_distribution(FrameRule::born(), haar_state(5, 1), e2, e2), DimensionError);
}

TEST_CASE("perfect_correlation_residual", "[composite]") {
  const auto e2 = OrthonormalBasis::standard(2);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(perfect_correlation_residual(FrameRule::born(), schmidt_pair(r, r), e2, e2) < 1e-12);
  CHECK(perfect_correlation_residual(FrameRule::born(), schmidt_pair(0.8, 0.6), e2, e2) < 1e-12);

  const auto lin = FrameRule::power_law(1.0);
  CHECK(perfect_correlation_residual(lin, schmidt_pair(0.8, 0.6), e2, e2) < 1e-12);
  const auto p = joint_distribution(lin, schmidt_pair(0.8, 0.6), e2, e2);
  CHECK_THAT(p(0, 0), WithinAbs(0.8 / 1.4, 1e-15));
  CHECK_THAT(p(1, 1), WithinAbs(0.6 / 1.4, 1e-15));
  CHECK(std::abs(p(0, 0) - 0.64) > 1e-2);

  SECTION("random Schmidt states") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const std::size_t n = 2 + s % 3;
      const std::size_t m = n + s % 2;
      const auto form = schmidt_decompose(haar_state(n * m, s), ProductSpace(n, m));
      // n ≤ m, so the left factor is already a full basis
      REQUIRE(form.rank() == n);
      const OrthonormalBasis a(form.left);
      std::vector<CVector> cols;
      for (Eigen::Index j = 0; j < form.right.cols(); ++j) cols.emplace_back(form.right.col(j));
      const auto right = orthonormal_complete(std::span<const CVector>(cols), m);
      CHECK(perfect_correlation_residual(FrameRule::born(), StateVector::normalized(form.reconstruct()), a, right) < 1e-12);
    }
  }

  REQUIRE_THROWS_AS(perfect_correlation_residual(FrameRule::born(), haar_state(4, 3), e2, e2), SchmidtFormError);
}

TEST_CASE("signalling_magnitude", "[composite][signalling]") {
  const auto psi = test::reference_state();
  const auto e = OrthonormalBasis::standard(3);
  const MeasurementContext a{e, e, "A"};
  const MeasurementContext a_prime{collapse_to_two(psi, e, 0), haar_basis(3, 9), "A'"};

  const auto born = signalling_magnitude(FrameRule::born(), psi, a, a_prime, {0, 0});
  CHECK(born.gap < 1e-12);
  CHECK_THAT(born.p_a, WithinAbs(0.5, 1e-12));
  CHECK(born.label_a == "A");
  CHECK(born.label_a_prime == "A'");

  const auto lin = signalling_magnitude(FrameRule::power_law(1.0), psi, a, a_prime, {0, 0});
  CHECK_THAT(lin.gap, WithinAbs(linear_gap_oracle(), 1e-12));
  CHECK_THAT(lin.gap, WithinAbs(0.084, 1e-3));
  CHECK(lin.gap == std::abs(lin.p_a - lin.p_a_prime));

  for (const auto& rule : {FrameRule::born(), FrameRule::power_law(0.5), FrameRule::phase_sensitive_stub()}) {
    CHECK(signalling_magnitude(rule, psi, a, a, {1, 1}).gap == 0.0);
  }

  SECTION("Born never signals") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      const std::size_t dim = 3 + s % 4;
      const auto basis = haar_basis(dim, s);
      const std::size_t k = s % dim;
      const MeasurementContext ca{basis, haar_basis(dim, s + 1), "A"};
      const MeasurementContext cb{random_sharing_basis(basis, k, s + 2), haar_basis(dim, s + 3), "A'"};
      CHECK(signalling_magnitude(FrameRule::born(), haar_state(dim, s + 4), ca, cb, {k, 0}).gap < 1e-12);
    }
  }

  const MeasurementContext unrelated{haar_basis(3, 5), e, "B"};
  REQUIRE_THROWS_AS(signalling_magnitude(FrameRule::born(), psi, a, unrelated, {0, 0}), EmptySharedSetError);
}

TEST_CASE("extend_dim2", "[composite]") {
  const auto born = FrameRule::born();
  CHECK_THAT(extend_dim2(StateVector::basis_state(2, 0), 0.0, 0.0).outcome_probability(born, 0), WithinAbs(1.0, 1e-15));

  const double r = 1.0 / std::sqrt(2.0);
  const auto ext = extend_dim2(test::real_state({r, r}), 0.5, 0.5);
  CHECK_THAT(std::abs(ext.joint[0]), WithinAbs(r, 1e-15));
  CHECK_THAT(std::abs(ext.joint[4]), WithinAbs(0.5, 1e-15));
  CHECK_THAT(std::abs(ext.joint[5]), WithinAbs(0.5, 1e-15));
  CHECK_THAT(ext.outcome_probability(born, 0), WithinAbs(0.5, 1e-15));

  const double h = std::sqrt(0.5) * std::sqrt(0.7);
  CHECK_THAT(extend_dim2(test::real_state({std::sqrt(0.3), std::sqrt(0.7)}), h, h).outcome_probability(born, 0),
             WithinAbs(0.3, 1e-12));

  SECTION("random states and splits") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto psi = haar_state(2, s);
      Rng rng(s + 1);
      const double c2 = std::abs(psi[1]);
      const double t = rng.uniform(0.0, 1.0) * 1.5707963267948966;
      const Complex s2 = std::polar(c2 * std::cos(t), 6.283185307179586 * rng.uniform(0.0, 1.0));
      const Complex s3 = std::polar(c2 * std::sin(t), 6.283185307179586 * rng.uniform(0.0, 1.0));
      CHECK_THAT(extend_dim2(psi, s2, s3).outcome_probability(born, 0), WithinAbs(std::norm(psi[0]), 1e-12));
    }
  }

  REQUIRE_THROWS_AS(extend_dim2(test::real_state({r, r}), 0.5, 0.6), SplitConstraintError);
  REQUIRE_THROWS_AS(extend_dim2(test::reference_state(), 0.5, 0.5), DimensionError);
}
