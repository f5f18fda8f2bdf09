#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "test_utils.hpp"
#include "ttlab/serialize.hpp"

using namespace ttlab;

TEST_CASE("Tensor3 invariants", "[core]") {
  Tensor3 t(2, 3, 4);
  REQUIRE(t.size() == 24);
  CHECK_THROWS_AS(Tensor3(0, 2, 1), shape_error);
  t(1, 2, 3) = cplx(1, -2);
  CHECK(t.left_matrix()(1 * 3 + 2, 3) == cplx(1, -2));
  CHECK(t.right_matrix()(1, 2 * 4 + 3) == cplx(1, -2));
  CHECK(t.phys_slice(2)(1, 3) == cplx(1, -2));
}

TEST_CASE("mps_from_dense basic examples", "[core]") {
  SECTION("product state |00> has unit bonds") {
    Vector v(4);
    v << 1, 0, 0, 0;
    auto mps = mps_from_dense(v, {2, 2});
    REQUIRE(mps.size() == 2);
    CHECK(mps.bond_dimensions() == std::vector<index_t>{1, 1, 1});
    CHECK(oracle::max_abs_diff(mps_to_dense(mps), v) < 1e-14);
  }
  SECTION("identity unfolding has rank 2") {
    Vector v(4);
    v << 1, 0, 0, 1;
    auto mps = mps_from_dense(v, {2, 2});
    CHECK(mps.bond_dimensions() == std::vector<index_t>{1, 2, 1});
    CHECK(oracle::max_abs_diff(mps_to_dense(mps), v) < 1e-14);
  }
  SECTION("dense round trip on random vectors") {
    for (uint64_t seed : {1u, 2u, 3u}) {
      Vector v = oracle::random_vector(16, seed);
      auto mps = mps_from_dense(v, {2, 2, 2, 2});
      CHECK((mps_to_dense(mps) - v).norm() < 1e-12);
      CHECK(mps.center() == 0);
    }
  }
  SECTION("size mismatch raises") {
    CHECK_THROWS_AS(mps_from_dense(Vector::Zero(5), {2, 2}), shape_error);
  }
  SECTION("mixed radix dimensions") {
    Vector v = oracle::random_vector(24, 77);
    auto mps = mps_from_dense(v, {2, 3, 4});
    CHECK((mps_to_dense(mps) - v).norm() < 1e-12);
  }
}

TEST_CASE("mps_to_dense conventions", "[core]") {
  SECTION("|0...0> maps to e_0") {
    MPS zero = basis_state(4, 2, 0);
    Vector dense = mps_to_dense(zero);
    CHECK(dense(0) == cplx(1));
    CHECK(dense.tail(15).norm() == 0.0);
  }
  SECTION("most significant site first") {
    // |01> = index 1 under MSB-first ordering
    MPS s = basis_state(2, 2, 1);
    Vector dense = mps_to_dense(s);
    CHECK(dense(1) == cplx(1));
  }
  SECTION("guard triggers a capacity error") {
    MPS big = random_uniform_mps(8, 2, 1, 1);
    CHECK_THROWS_AS(mps_to_dense(big, 128), capacity_error);
  }
}

TEST_CASE("schmidt_split", "[core]") {
  SECTION("identity/sqrt(2): no truncation, zero error") {
    Matrix theta = Matrix::Identity(2, 2) / std::sqrt(2.0);
    auto split = schmidt_split(theta, NO_TRUNCATION);
    CHECK(split.error == 0.0);
    CHECK((split.a * split.b - theta).norm() < 1e-14);
    auto s = schmidt_values(theta);
    CHECK(s(0) == Catch::Approx(1 / std::sqrt(2.0)));
    CHECK(s(1) == Catch::Approx(1 / std::sqrt(2.0)));
  }
  SECTION("max_bond 1 drops half the weight") {
    Matrix theta = Matrix::Identity(2, 2) / std::sqrt(2.0);
    auto split = schmidt_split(theta, NO_TRUNCATION.with_max_bond(1));
    CHECK(split.error == Catch::Approx(1 / std::sqrt(2.0)));
    CHECK(split.a.cols() == 1);
  }
  SECTION("random 4x4: reconstruction distance equals reported error") {
    Matrix theta = oracle::random_matrix(4, 4, 5);
    auto split = schmidt_split(theta, NO_TRUNCATION.with_max_bond(2));
    CHECK((split.a * split.b - theta).norm() == Catch::Approx(split.error).margin(1e-12));
  }
  SECTION("direction controls which factor is isometric") {
    Matrix theta = oracle::random_matrix(6, 4, 9);
    auto lr = schmidt_split(theta, NO_TRUNCATION, SweepDirection::LEFT_TO_RIGHT);
    CHECK((lr.a.adjoint() * lr.a - Matrix::Identity(4, 4)).norm() < 1e-12);
    auto rl = schmidt_split(theta, NO_TRUNCATION, SweepDirection::RIGHT_TO_LEFT);
    CHECK((rl.b * rl.b.adjoint() - Matrix::Identity(4, 4)).norm() < 1e-12);
  }
}

namespace {

void check_isometries(const CanonicalMPS &state) {
  for (index_t n = 0; n < state.size(); ++n) {
    if (n < state.center()) {
      Matrix a = state[n].left_matrix();
      REQUIRE((a.adjoint() * a - Matrix::Identity(a.cols(), a.cols())).norm() <= 1e-12);
    } else if (n > state.center()) {
      Matrix b = state[n].right_matrix();
      REQUIRE((b * b.adjoint() - Matrix::Identity(b.rows(), b.rows())).norm() <= 1e-12);
    }
  }
}

} // namespace

TEST_CASE("canonicalize", "[core]") {
  SECTION("isometry invariants at every center") {
    MPS state = random_uniform_mps(6, 2, 5, 42);
    for (index_t center : {0, 2, 5}) {
      auto c = canonicalize(state, center, NO_TRUNCATION);
      CHECK(c.center() == center);
      check_isometries(c);
      CHECK(oracle::max_abs_diff(mps_to_dense(c), mps_to_dense(state)) < 1e-12);
    }
  }
  SECTION("already-canonical input at same center is unchanged") {
    MPS state = random_uniform_mps(5, 2, 4, 7);
    auto c = canonicalize(state, 2, NO_TRUNCATION);
    auto c2 = canonicalize(c, 2, NO_TRUNCATION);
    for (index_t n = 0; n < c.size(); ++n)
      for (index_t i = 0; i < c[n].size(); ++i)
        REQUIRE(std::abs(c[n].data()[i] - c2[n].data()[i]) < 1e-14);
  }
  SECTION("truncation error equals dense distance") {
    MPS state = random_uniform_mps(8, 2, 8, 3);
    Vector exact = mps_to_dense(state);
    auto c = canonicalize(state, 3, NO_TRUNCATION.with_max_bond(4));
    const double dist = (mps_to_dense(c) - exact).norm();
    CHECK(dist <= c.error());
    CHECK(std::abs(dist - c.error()) < 1e-10 * exact.norm());
    CHECK(c.max_bond_dimension() <= 4);
    check_isometries(c);
  }
  SECTION("center moved back and forth leaves the vector invariant") {
    MPS state = random_uniform_mps(6, 2, 4, 11);
    Vector exact = mps_to_dense(state);
    auto c = canonicalize(state, 0, NO_TRUNCATION);
    c.recenter(5, NO_TRUNCATION);
    c.recenter(0, NO_TRUNCATION);
    CHECK((mps_to_dense(c) - exact).norm() < 1e-12 * exact.norm());
  }
}

TEST_CASE("norm", "[core]") {
  SECTION("|0...0> has unit norm") {
    CHECK(basis_state(5, 2, 0).norm() == Catch::Approx(1.0));
  }
  SECTION("homogeneity under scaling") {
    MPS state = random_uniform_mps(5, 2, 3, 17);
    CHECK(state.scaled(2.0).norm() == Catch::Approx(2 * state.norm()));
    CHECK(state.scaled(cplx(0, -3)).norm() == Catch::Approx(3 * state.norm()));
    CHECK(oracle::max_abs_diff(mps_to_dense(state.scaled(cplx(1.5, 0.5))),
                               cplx(1.5, 0.5) * mps_to_dense(state)) < 1e-12);
  }
  SECTION("dense oracle") {
    MPS state = random_uniform_mps(6, 2, 4, 23);
    CHECK(state.norm() == Catch::Approx(mps_to_dense(state).norm()).epsilon(1e-12));
    auto c = canonicalize(state, 2, NO_TRUNCATION);
    CHECK(c.norm() == Catch::Approx(state.norm()).epsilon(1e-12));
  }
}

TEST_CASE("random_uniform_mps", "[core]") {
  SECTION("bond 1 gives a product state") {
    MPS state = random_uniform_mps(3, 2, 1, 5);
    CHECK(state.max_bond_dimension() == 1);
  }
  SECTION("deterministic under seed") {
    MPS a = random_uniform_mps(4, 2, 3, 99);
    MPS b = random_uniform_mps(4, 2, 3, 99);
    for (index_t n = 0; n < a.size(); ++n)
      for (index_t i = 0; i < a[n].size(); ++i)
        REQUIRE(a[n].data()[i] == b[n].data()[i]);
  }
  SECTION("interior bonds respect the dimension caps") {
    MPS state = random_uniform_mps(4, 2, 16, 1);
    CHECK(state.bond_dimensions() == std::vector<index_t>{1, 2, 4, 2, 1});
  }
  SECTION("canonicalize smoke test") {
    MPS state = random_uniform_mps(8, 2, 4, 13);
    auto c = canonicalize(state, 4, NO_TRUNCATION);
    CHECK(c.norm() > 0);
    check_isometries(c);
  }
}

TEST_CASE("mpo identity and dense conversion", "[core]") {
  SECTION("identity matrix") {
    CHECK(oracle::max_abs_diff(mpo_to_dense(mpo_identity(2, 2)), Matrix::Identity(4, 4)) == 0.0);
  }
  SECTION("identity leaves states invariant") {
    MPS state = random_uniform_mps(5, 2, 3, 21);
    MPS applied = detail::apply_raw(mpo_identity(5, 2), state);
    CHECK(oracle::max_abs_diff(mps_to_dense(applied), mps_to_dense(state)) < 1e-14);
  }
  SECTION("single-site sigma_z embedding") {
    std::vector<Matrix> locals = {oracle::sigma_z(), Matrix::Identity(2, 2)};
    Matrix dense = mpo_to_dense(mpo_from_local_operators(locals));
    CHECK(oracle::max_abs_diff(dense, oracle::kron(oracle::sigma_z(), Matrix::Identity(2, 2))) <
          1e-14);
  }
  SECTION("random MPO on random MPS matches dense matvec") {
    MPS state = random_uniform_mps(4, 2, 3, 31);
    // random MPO from local operators and a sum
    MPO a = mpo_from_local_operators({oracle::random_matrix(2, 2, 1), oracle::random_matrix(2, 2, 2),
                                      oracle::random_matrix(2, 2, 3), oracle::random_matrix(2, 2, 4)});
    MPO b = mpo_from_local_operators({oracle::random_matrix(2, 2, 5), oracle::random_matrix(2, 2, 6),
                                      oracle::random_matrix(2, 2, 7), oracle::random_matrix(2, 2, 8)});
    MPO sum = mpo_sum({cplx(0.5, 0.25), cplx(-1, 1)}, {a, b});
    Vector lhs = mps_to_dense(detail::apply_raw(sum, state));
    Vector rhs = mpo_to_dense(sum) * mps_to_dense(state);
    CHECK(oracle::max_abs_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("serialization round trip is bit exact", "[core]") {
  MPS state = random_uniform_mps(5, 2, 4, 123);
  state.set_error(0.125);
  std::stringstream buffer;
  save_mps(buffer, state);
  MPS loaded = load_mps(buffer);
  REQUIRE(loaded.size() == state.size());
  CHECK(loaded.error() == state.error());
  for (index_t n = 0; n < state.size(); ++n) {
    REQUIRE(loaded[n].size() == state[n].size());
    for (index_t i = 0; i < state[n].size(); ++i)
      REQUIRE(std::memcmp(&loaded[n].data()[i], &state[n].data()[i], sizeof(cplx)) == 0);
  }

  MPO op = mpo_identity(3, 2);
  std::stringstream obuf;
  save_mpo(obuf, op);
  MPO oload = load_mpo(obuf);
  REQUIRE(oload.size() == op.size());
  for (index_t n = 0; n < op.size(); ++n)
    for (index_t i = 0; i < op[n].size(); ++i)
      REQUIRE(oload[n].data()[i] == op[n].data()[i]);

  SECTION("bad magic rejected") {
    std::stringstream bad("garbage");
    CHECK_THROWS_AS(load_mps(bad), numeric_error);
  }
}

TEST_CASE("error ledger basics", "[core]") {
  MPS state = random_uniform_mps(6, 2, 6, 55);
  auto c1 = canonicalize(state, 0, NO_TRUNCATION.with_max_bond(3));
  auto c2 = canonicalize(static_cast<const MPS &>(c1), 0, NO_TRUNCATION.with_max_bond(2));
  CHECK(c2.error() >= c1.error());
  const double dist = (mps_to_dense(c2) - mps_to_dense(state)).norm();
  CHECK(dist <= c2.error());
}
