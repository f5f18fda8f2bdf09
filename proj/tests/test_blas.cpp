#include <catch2/catch_amalgamated.hpp>

#include "test_utils.hpp"
#include "ttlab/blas.hpp"

using namespace ttlab;

TEST_CASE("combine", "[blas]") {
  SECTION("v + v = 2v") {
    MPS v = random_uniform_mps(4, 2, 2, 1);
    auto sum = combine({1.0, 1.0}, {v, v});
    CHECK(oracle::max_abs_diff(mps_to_dense(sum), 2.0 * mps_to_dense(v)) < 1e-12);
  }
  SECTION("v - v has vanishing norm") {
    MPS v = random_uniform_mps(4, 2, 2, 2);
    auto diff = combine({1.0, -1.0}, {v, v});
    CHECK(diff.norm() <= 1e-12);
  }
  SECTION("random 3-term combination matches the dense sum") {
    std::vector<MPS> states = {random_uniform_mps(5, 2, 2, 3), random_uniform_mps(5, 2, 3, 4),
                               random_uniform_mps(5, 2, 2, 5)};
    std::vector<cplx> w = {cplx(0.3, -1.0), cplx(-2.0, 0.1), cplx(0.0, 0.7)};
    Vector expected = Vector::Zero(32);
    for (size_t l = 0; l < states.size(); ++l)
      expected += w[l] * mps_to_dense(states[l]);
    auto sum = combine(w, states, DEFAULT_STRATEGY.with_max_sweeps(8));
    CHECK((mps_to_dense(sum) - expected).norm() < 1e-10);
    CHECK((mps_to_dense(sum) - expected).norm() <= sum.error());
    // SVD route agrees
    auto svd_sum = combine(w, states, NO_TRUNCATION);
    CHECK((mps_to_dense(svd_sum) - expected).norm() < 1e-10);
  }
  SECTION("empty and mismatched input raise") {
    CHECK_THROWS_AS(combine({}, {}), shape_error);
    CHECK_THROWS_AS(combine({1.0}, {random_uniform_mps(3, 2, 1, 1), random_uniform_mps(3, 2, 1, 2)}),
                    shape_error);
  }
}

TEST_CASE("simplify", "[blas]") {
  SECTION("exact-rank input is reproduced") {
    MPS v = random_uniform_mps(6, 2, 4, 7);
    auto s = simplify(v, DEFAULT_STRATEGY.with_max_sweeps(6));
    CHECK((mps_to_dense(s) - mps_to_dense(v)).norm() < 1e-10 * v.norm());
  }
  SECTION("bounded bond matches the Schmidt optimum for a single cut") {
    // chi=8 state truncated to chi=4: the variational optimum saturates the
    // best rank-4 approximation across the middle cut
    MPS v = random_uniform_mps(6, 2, 8, 8);
    Vector dense = mps_to_dense(v);
    auto s = simplify(v, DEFAULT_STRATEGY.with_max_bond(4).with_max_sweeps(12));
    CHECK(s.max_bond_dimension() <= 4);
    const double dist = (mps_to_dense(s) - dense).norm();
    Matrix unfolding(8, 8);
    for (index_t r = 0; r < 8; ++r)
      for (index_t c = 0; c < 8; ++c)
        unfolding(r, c) = dense(r * 8 + c);
    Eigen::JacobiSVD<Matrix> svd(unfolding);
    double lower = 0.0;
    for (index_t k = 4; k < 8; ++k)
      lower += svd.singularValues()(k) * svd.singularValues()(k);
    lower = std::sqrt(lower);
    CHECK(dist >= lower - 1e-12);
    CHECK(dist <= 1.10 * std::max(lower, 1e-14));
    CHECK(std::abs(s.error() - dist) < 1e-8 * dense.norm());
  }
  SECTION("MPSSum of v and -v collapses to zero") {
    MPS v = random_uniform_mps(4, 2, 3, 9);
    auto s = simplify(MPSSum({1.0, -1.0}, {v, v}));
    CHECK(s.norm() <= 1e-12);
  }
  SECTION("guess is accepted") {
    MPS v = random_uniform_mps(5, 2, 3, 10);
    auto s = simplify(v, DEFAULT_STRATEGY.with_max_sweeps(8), basis_state(5, 2, 0));
    CHECK((mps_to_dense(s) - mps_to_dense(v)).norm() < 1e-9 * v.norm());
  }
}

TEST_CASE("simplify_mpo", "[blas]") {
  SECTION("identity + identity = 2 identity with unit bonds") {
    MPO id = mpo_identity(4, 2);
    MPO two = simplify_mpo({1.0, 1.0}, {id, id}, DEFAULT_STRATEGY.with_tolerance(1e-14));
    CHECK(two.max_bond_dimension() == 1);
    CHECK(oracle::max_abs_diff(mpo_to_dense(two), 2.0 * Matrix::Identity(16, 16)) < 1e-12);
  }
  SECTION("random MPO sum against dense") {
    auto rand_mpo = [](uint64_t seed) {
      std::vector<Matrix> locals;
      for (uint64_t n = 0; n < 4; ++n)
        locals.push_back(oracle::random_matrix(2, 2, seed * 10 + n));
      return mpo_from_local_operators(locals);
    };
    MPO a = rand_mpo(1), b = rand_mpo(2);
    Matrix expected = 0.5 * mpo_to_dense(a) + 2.0 * mpo_to_dense(b);
    MPO sum = simplify_mpo({0.5, 2.0}, {a, b}, DEFAULT_STRATEGY.with_max_sweeps(8));
    CHECK(oracle::max_abs_diff(mpo_to_dense(sum), expected) < 1e-10);
  }
  SECTION("hermitian input stays hermitian") {
    Matrix sz = oracle::sigma_z(), sx = oracle::sigma_x(), id = Matrix::Identity(2, 2);
    MPO a = mpo_from_local_operators({sz, sx, id});
    MPO b = mpo_from_local_operators({sx, id, sz});
    MPO sum = simplify_mpo({1.0, 1.0}, {a, b}, DEFAULT_STRATEGY.with_tolerance(1e-14));
    Matrix dense = mpo_to_dense(sum);
    CHECK((dense - dense.adjoint()).norm() <= 1e-12 * dense.norm());
  }
}

TEST_CASE("apply", "[blas]") {
  SECTION("identity MPO leaves the state unchanged") {
    MPS v = random_uniform_mps(5, 2, 3, 11);
    auto w = apply(mpo_identity(5, 2), v);
    CHECK((mps_to_dense(w) - mps_to_dense(v)).norm() <= 1e-12 * v.norm());
  }
  SECTION("random MPO on random MPS, dense oracle") {
    MPS v = random_uniform_mps(6, 2, 3, 12);
    MPO a = mpo_sum({cplx(1, 0.5), cplx(-0.3, 0)},
                    {mpo_from_local_operators({oracle::random_matrix(2, 2, 21),
                                               oracle::random_matrix(2, 2, 22),
                                               oracle::random_matrix(2, 2, 23),
                                               oracle::random_matrix(2, 2, 24),
                                               oracle::random_matrix(2, 2, 25),
                                               oracle::random_matrix(2, 2, 26)}),
                     mpo_identity(6, 2)});
    Vector expected = mpo_to_dense(a) * mps_to_dense(v);
    auto w = apply(a, v, DEFAULT_STRATEGY.with_max_sweeps(8));
    CHECK((mps_to_dense(w) - expected).norm() < 1e-10 * expected.norm());
  }
  SECTION("dimension mismatch raises") {
    CHECK_THROWS_AS(apply(mpo_identity(3, 2), random_uniform_mps(4, 2, 1, 1)), shape_error);
    CHECK_THROWS_AS(apply(mpo_identity(4, 3), random_uniform_mps(4, 2, 1, 1)), shape_error);
  }
  SECTION("MPOList applies factors right to left") {
    MPS v = random_uniform_mps(3, 2, 2, 13);
    Matrix m1 = oracle::random_matrix(2, 2, 31);
    Matrix m2 = oracle::random_matrix(2, 2, 32);
    MPO a = mpo_from_local_operators({m1, Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    MPO b = mpo_from_local_operators({m2, Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    MPOList ops({a, b});
    Vector expected = mpo_to_dense(a) * (mpo_to_dense(b) * mps_to_dense(v));
    CHECK((mps_to_dense(apply(ops, v)) - expected).norm() < 1e-10);
  }
}

TEST_CASE("scprod and expectations", "[blas]") {
  SECTION("<v,v> = norm^2 and conjugate symmetry") {
    MPS v = random_uniform_mps(5, 2, 3, 14);
    MPS u = random_uniform_mps(5, 2, 2, 15);
    CHECK(std::real(scprod(v, v)) == Catch::Approx(v.norm_squared()));
    CHECK(std::abs(scprod(u, v) - std::conj(scprod(v, u))) < 1e-13);
    CHECK(std::abs(scprod(u, v) - mps_to_dense(u).dot(mps_to_dense(v))) < 1e-12);
  }
  SECTION("orthogonal basis states") {
    CHECK(std::abs(scprod(basis_state(3, 2, 0), basis_state(3, 2, 1))) == 0.0);
  }
  SECTION("expectation_local singles and pairs") {
    CHECK(std::real(expectation_local(basis_state(3, 2, 0), oracle::sigma_z(), 0)) ==
          Catch::Approx(1.0));
    MPS s01 = basis_state(2, 2, 1);
    CHECK(std::real(expectation_local(s01, oracle::sigma_z(), 0, oracle::sigma_z(), 1)) ==
          Catch::Approx(-1.0));
    MPS v = random_uniform_mps(4, 2, 3, 16);
    Vector dense = mps_to_dense(v);
    Matrix op = oracle::random_matrix(2, 2, 40);
    cplx expected = dense.dot(oracle::embed(op, 2, 4) * dense);
    CHECK(std::abs(expectation_local(v, op, 2) - expected) < 1e-12);
    Matrix op2 = oracle::random_matrix(2, 2, 41);
    cplx expected2 = dense.dot(oracle::embed(op, 1, 4) * oracle::embed(op2, 3, 4) * dense);
    CHECK(std::abs(expectation_local(v, op, 1, op2, 3) - expected2) < 1e-12);
  }
  SECTION("expectation_mpo") {
    MPS u = random_uniform_mps(4, 2, 2, 17);
    MPS v = random_uniform_mps(4, 2, 3, 18);
    CHECK(std::abs(expectation_mpo(mpo_identity(4, 2), u, v) - scprod(u, v)) < 1e-12);
    MPO op = mpo_from_local_operators({oracle::random_matrix(2, 2, 51), oracle::random_matrix(2, 2, 52),
                                       oracle::random_matrix(2, 2, 53), oracle::random_matrix(2, 2, 54)});
    cplx expected = mps_to_dense(u).dot(mpo_to_dense(op) * mps_to_dense(v));
    CHECK(std::abs(expectation_mpo(op, u, v) - expected) < 1e-12);
  }
}

TEST_CASE("hadamard", "[blas]") {
  SECTION("product with all-ones is the identity map") {
    MPS v = random_uniform_mps(4, 2, 3, 19);
    MPS ones = product_state(4, Vector::Ones(2));
    CHECK(oracle::max_abs_diff(mps_to_dense(hadamard(v, ones)), mps_to_dense(v)) < 1e-13);
  }
  SECTION("basis states multiply to delta") {
    MPS e1 = basis_state(3, 2, 1), e2 = basis_state(3, 2, 2);
    CHECK(mps_to_dense(hadamard(e1, e2)).norm() == 0.0);
    CHECK(oracle::max_abs_diff(mps_to_dense(hadamard(e1, e1)), mps_to_dense(e1)) < 1e-14);
  }
  SECTION("random pair dense oracle and exact bond product") {
    MPS u = random_uniform_mps(5, 2, 2, 20);
    MPS v = random_uniform_mps(5, 2, 3, 21);
    MPS w = hadamard(u, v);
    Vector expected = mps_to_dense(u).cwiseProduct(mps_to_dense(v));
    CHECK(oracle::max_abs_diff(mps_to_dense(w), expected) < 1e-12);
    auto bu = u.bond_dimensions(), bv = v.bond_dimensions(), bw = w.bond_dimensions();
    for (size_t k = 0; k < bw.size(); ++k)
      REQUIRE(bw[k] == bu[k] * bv[k]);
  }
}

TEST_CASE("mpo_from_diagonal_mps", "[blas]") {
  SECTION("ones vector gives the identity") {
    MPS ones = product_state(3, Vector::Ones(2));
    CHECK(oracle::max_abs_diff(mpo_to_dense(mpo_from_diagonal_mps(ones)), Matrix::Identity(8, 8)) <
          1e-14);
  }
  SECTION("basis vector gives a rank-one diagonal") {
    MPS e0 = basis_state(2, 2, 0);
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = 1;
    CHECK(oracle::max_abs_diff(mpo_to_dense(mpo_from_diagonal_mps(e0)), expected) < 1e-14);
  }
  SECTION("diag(v) w = v .* w") {
    MPS v = random_uniform_mps(4, 2, 2, 22);
    MPS w = random_uniform_mps(4, 2, 3, 23);
    Vector via_mpo = mps_to_dense(detail::apply_raw(mpo_from_diagonal_mps(v), w));
    Vector via_hadamard = mps_to_dense(hadamard(v, w));
    CHECK(oracle::max_abs_diff(via_mpo, via_hadamard) < 1e-12);
  }
}

TEST_CASE("outer operations", "[blas]") {
  SECTION("two single-qubit states, order A = Kronecker") {
    Vector a(2), b(2);
    a << cplx(0.3, 1), cplx(-1, 0.2);
    b << cplx(2, 0), cplx(0, -1);
    MPS ma = mps_from_dense(a, {2});
    MPS mb = mps_from_dense(b, {2});
    CHECK(oracle::max_abs_diff(mps_to_dense(mps_tensor_product({ma, mb})), oracle::kron(a, b)) <
          1e-13);
  }
  SECTION("order B interleaves sites") {
    MPS u = random_uniform_mps(2, 2, 2, 24);
    MPS v = random_uniform_mps(2, 2, 2, 25);
    Vector du = mps_to_dense(u), dv = mps_to_dense(v);
    Vector expected(16);
    for (index_t u1 = 0; u1 < 2; ++u1)
      for (index_t v1 = 0; v1 < 2; ++v1)
        for (index_t u2 = 0; u2 < 2; ++u2)
          for (index_t v2 = 0; v2 < 2; ++v2)
            expected(((u1 * 2 + v1) * 2 + u2) * 2 + v2) = du(u1 * 2 + u2) * dv(v1 * 2 + v2);
    CHECK(oracle::max_abs_diff(mps_to_dense(mps_tensor_product({u, v}, TensorOrder::B)), expected) <
          1e-12);
  }
  SECTION("random pair order A dense oracle") {
    MPS u = random_uniform_mps(3, 2, 2, 26);
    MPS v = random_uniform_mps(2, 2, 2, 27);
    CHECK(oracle::max_abs_diff(mps_to_dense(mps_tensor_product({u, v})),
                               oracle::kron(mps_to_dense(u), mps_to_dense(v))) < 1e-12);
  }
  SECTION("tensor sum encodes x + y") {
    MPS x = random_uniform_mps(3, 2, 2, 28);
    Vector dx = mps_to_dense(x);
    MPS sum = mps_tensor_sum({x, x});
    Vector dense = mps_to_dense(sum);
    for (index_t i = 0; i < 8; ++i)
      for (index_t j = 0; j < 8; ++j)
        REQUIRE(std::abs(dense(i * 8 + j) - (dx(i) + dx(j))) < 1e-12);
    MPS sumB = mps_tensor_sum({x, x}, TensorOrder::B);
    Vector denseB = mps_to_dense(sumB);
    auto interleave = [](index_t i, index_t j) {
      index_t out = 0;
      for (int b = 2; b >= 0; --b) {
        out = (out << 1) | ((i >> b) & 1);
        out = (out << 1) | ((j >> b) & 1);
      }
      return out;
    };
    for (index_t i = 0; i < 8; ++i)
      for (index_t j = 0; j < 8; ++j)
        REQUIRE(std::abs(denseB(interleave(i, j)) - (dx(i) + dx(j))) < 1e-12);
  }
  SECTION("single input sum is the identity") {
    MPS x = random_uniform_mps(3, 2, 2, 29);
    CHECK(oracle::max_abs_diff(mps_to_dense(mps_tensor_sum({x})), mps_to_dense(x)) == 0.0);
  }
  SECTION("constant inputs add up") {
    // per-site amplitude 0.7 over two sites encodes the constant 0.49
    MPS c = product_state(2, Vector::Ones(2) * cplx(0.7));
    Vector dense = mps_to_dense(mps_tensor_sum({c, c}));
    for (index_t i = 0; i < dense.size(); ++i)
      REQUIRE(std::abs(dense(i) - cplx(0.98)) < 1e-13);
  }
}

TEST_CASE("two-site forms", "[blas]") {
  MPS v = random_uniform_mps(6, 2, 3, 30);
  MPS w = random_uniform_mps(6, 2, 2, 31);
  SECTION("linear form reproduces the overlap at any site") {
    for (index_t n : {0, 2, 4}) {
      TwoSiteLinearForm form(v, w, n);
      CHECK(std::abs(form.scalar() - scprod(v, w)) < 1e-12);
    }
  }
  SECTION("quadratic form reproduces the sandwich at any site") {
    MPO op = mpo_sum({1.0, cplx(0, 1)},
                     {mpo_identity(6, 2),
                      mpo_from_local_operators({oracle::sigma_x(), oracle::sigma_z(),
                                                Matrix::Identity(2, 2), oracle::sigma_y(),
                                                Matrix::Identity(2, 2), oracle::sigma_x()})});
    for (index_t n : {0, 3, 4}) {
      TwoSiteQuadraticForm form(v, op, w, n);
      CHECK(std::abs(form.scalar() - expectation_mpo(op, v, w)) < 1e-12);
    }
  }
  SECTION("forms at neighboring sites give the same scalar") {
    TwoSiteLinearForm f2(v, w, 2), f3(v, w, 3);
    CHECK(std::abs(f2.scalar() - f3.scalar()) < 1e-12);
  }
  SECTION("with w = v and op = I the quadratic form is PSD") {
    MPS c = canonicalize(v, 2, NO_TRUNCATION);
    TwoSiteQuadraticForm form(c, mpo_identity(6, 2), c, 2);
    Matrix g = form.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(0.5 * (g + g.adjoint())));
    CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  }
}
