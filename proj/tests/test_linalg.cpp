#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qswitch/quantum_switch.hpp"
#include "qswitch/uniqueness.hpp"

using namespace qswitch;

namespace {

Matrix random_matrix(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) m(r, c) = cplx(g(rng), g(rng));
    return m;
}

Matrix random_hermitian_matrix(Eigen::Index n, std::mt19937_64& rng) {
    const Matrix m = random_matrix(n, rng);
    return (m + m.adjoint()) / 2.0;
}

Operator basis_op(const SpaceLayout& l, std::initializer_list<int> ket, std::initializer_list<int> bra) {
    return Operator::ket_bra(l, flat_index(l, ket), flat_index(l, bra));
}

}  // namespace

TEST(SpaceLayout, RejectsEmptyDuplicateAndNonPositive) {
    EXPECT_THROW(SpaceLayout(std::vector<Subsystem>{}), LinalgError);
    EXPECT_THROW(SpaceLayout({{"A", 2}, {"A", 3}}), LinalgError);
    EXPECT_THROW(SpaceLayout({{"A", 0}}), LinalgError);
    const SpaceLayout l({{"A", 2}, {"B", 3}});
    EXPECT_EQ(l.total_dim(), 6u);
    EXPECT_EQ(l.index_of("B"), 1u);
    EXPECT_THROW(l.index_of("C"), LinalgError);
}

TEST(SpaceLayout, FlatIndexRoundTrip) {
    const SpaceLayout l({{"A", 2}, {"B", 3}, {"C", 4}});
    for (std::size_t t = 0; t < l.total_dim(); ++t) {
        const auto dig = digits_of(l, t);
        EXPECT_EQ(flat_index(l, std::span<const int>(dig)), t);
    }
    EXPECT_EQ(flat_index(l, {1, 2, 3}), 23u);
}

TEST(Operator, RejectsShapeMismatch) {
    const SpaceLayout l({{"A", 2}});
    EXPECT_THROW(Operator(l, Matrix::Zero(3, 3)), LinalgError);
    EXPECT_THROW(Operator(l, Matrix::Zero(2, 3)), LinalgError);
}

TEST(TensorProduct, IdentityBasisAndChoiExamples) {
    const SpaceLayout a({{"A", 2}}), b({{"B", 2}});
    const auto id = tensor_product(Operator::identity(a), Operator::identity(b));
    EXPECT_EQ(id.layout().size(), 2u);
    EXPECT_EQ(id.matrix(), Matrix::Identity(4, 4));

    const auto k = tensor_product(Operator::ket_bra(a, 0, 0), Operator::ket_bra(b, 1, 1));
    EXPECT_EQ(k.matrix(), Operator::ket_bra(k.layout(), 1, 1).matrix());

    const auto jx = unitary_choi(pauli_matrix(1)).op().relabeled(SpaceLayout({{"I1", 2}, {"O1", 2}}));
    const auto jz = unitary_choi(pauli_matrix(3)).op().relabeled(SpaceLayout({{"I2", 2}, {"O2", 2}}));
    const auto p = tensor_product(jx, jz);
    EXPECT_NEAR(p.trace().real(), 4.0, 1e-12);
    EXPECT_EQ(numerical_rank(p), 1u);
    EXPECT_LE((p.matrix() - oracle::kron(jx.matrix(), jz.matrix())).norm(), 0.0);
}

TEST(TensorProduct, DuplicateLabelThrows) {
    const SpaceLayout a({{"A", 2}});
    EXPECT_THROW(tensor_product(Operator::identity(a), Operator::identity(a)), LinalgError);
}

TEST(PartialTrace, ProductAndEntangledExamples) {
    std::mt19937_64 rng(3);
    const SpaceLayout a({{"A", 2}}), b({{"B", 3}});
    const Operator rho(a, random_hermitian_matrix(2, rng)), sigma(b, random_hermitian_matrix(3, rng));
    const auto traced = partial_trace(tensor_product(rho, sigma), {"B"});
    EXPECT_LE((traced.matrix() - rho.matrix() * sigma.trace()).norm(), 1e-12 * rho.matrix().norm());

    const auto jid = unitary_choi(Matrix::Identity(2, 2));
    EXPECT_LE((partial_trace(jid.op(), {"I"}).matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(PartialTrace, MatchesExplicitLoops) {
    std::mt19937_64 rng(5);
    const SpaceLayout l({{"A", 2}, {"B", 3}, {"C", 2}});
    const Operator op(l, random_matrix(12, rng));
    const auto got = partial_trace(op, {"A", "C"});
    EXPECT_LE((got.matrix() - oracle::partial_trace(op.matrix(), {2, 3, 2}, {true, false, true})).norm(), 1e-13);
    EXPECT_EQ(got.layout(), SpaceLayout({{"B", 3}}));
}

TEST(PartialTrace, ErrorsOnUnknownOrAllLabels) {
    const SpaceLayout l({{"A", 2}, {"B", 2}});
    EXPECT_THROW(partial_trace(Operator::identity(l), {"C"}), LinalgError);
    EXPECT_THROW(partial_trace(Operator::identity(l), {"A", "B"}), LinalgError);
}

TEST(PartialTrace, SwitchOnIdentityPairGivesIdentityChannel) {
    const auto w = build_switch_choi(2);
    const auto slots = Operator(slot_pair_layout(2), oracle::kron(unitary_choi(Matrix::Identity(2, 2)).matrix(),
                                                                  unitary_choi(Matrix::Identity(2, 2)).matrix()));
    // Tr over the slots of W0 (J_I (x) J_I (x) I_PF)^t
    const auto full = tensor_product(partial_transpose(slots, {"I1", "O1", "I2", "O2"}),
                                     Operator::identity(switch_output_layout(2)));
    const auto out = partial_trace(w.op * full, {"I1", "O1", "I2", "O2"});
    const auto ch = output_as_channel(out);
    EXPECT_LE((ch.matrix() - oracle::unitary_choi(Matrix::Identity(4, 4))).norm(), 1e-12);
}

TEST(PartialTranspose, EmptyFullAndInvolution) {
    std::mt19937_64 rng(7);
    const SpaceLayout l({{"A", 2}, {"B", 3}});
    const Operator h(l, random_hermitian_matrix(6, rng));
    EXPECT_EQ(partial_transpose(h, std::span<const std::string>{}).matrix(), h.matrix());
    EXPECT_LE((partial_transpose(h, {"A", "B"}).matrix() - h.matrix().conjugate()).norm(), 0.0);
    const Operator m(l, random_matrix(6, rng));
    EXPECT_EQ(partial_transpose(partial_transpose(m, {"B"}), {"B"}).matrix(), m.matrix());
    EXPECT_THROW(partial_transpose(m, {"Z"}), LinalgError);
}

TEST(PartialTranspose, IsLinear) {
    std::mt19937_64 rng(9);
    const SpaceLayout l({{"A", 3}, {"B", 2}});
    const Operator x(l, random_matrix(6, rng)), y(l, random_matrix(6, rng));
    const cplx a(0.3, -1.2), b(2.0, 0.5);
    const auto lhs = partial_transpose(a * x + b * y, {"A"});
    const auto rhs = a * partial_transpose(x, {"A"}) + b * partial_transpose(y, {"A"});
    EXPECT_LE((lhs.matrix() - rhs.matrix()).norm(), 1e-13);
}

TEST(PermuteSystems, IdentitySwapAndRoundTrip) {
    const SpaceLayout l({{"A", 2}, {"B", 2}});
    const auto k = basis_op(l, {0, 1}, {0, 1});
    EXPECT_EQ(permute_systems(k, {"A", "B"}).matrix(), k.matrix());
    const auto swapped = permute_systems(k, {"B", "A"});
    EXPECT_EQ(swapped.matrix(), basis_op(swapped.layout(), {1, 0}, {1, 0}).matrix());
    EXPECT_THROW(permute_systems(k, {"A", "A"}), LinalgError);
    EXPECT_THROW(permute_systems(k, {"A"}), LinalgError);

    const auto w = build_switch_choi(2);
    const auto back = from_port_order(2, to_port_order(w));
    EXPECT_EQ(back.op.matrix(), w.op.matrix());
    EXPECT_EQ(back.op.layout(), w.op.layout());
}

TEST(HermitianEigen, Examples) {
    const SpaceLayout l4({{"A", 4}});
    const auto e = hermitian_eigen(Operator::identity(l4));
    EXPECT_LE((e.values - RealVector::Ones(4)).norm(), 1e-15);

    const auto w = build_switch_choi(2);
    const auto ev = hermitian_eigenvalues(w.op);
    EXPECT_NEAR(ev(0), 16.0, 1e-10);
    EXPECT_LE(ev.tail(ev.size() - 1).cwiseAbs().maxCoeff(), 1e-10);

    for (double p : {0.0, 0.3, 1.0}) {
        const auto m = hermitian_eigenvalues(Operator(SpaceLayout({{"X", 4}}), cp_factor(p)));
        RealVector want(4);
        want << 2 + 2 * p, 2 - 2 * p, 0, 0;
        std::sort(want.data(), want.data() + 4, std::greater<>());
        EXPECT_LE((m - want).cwiseAbs().maxCoeff(), 1e-12) << "p = " << p;
    }
}

TEST(HermitianEigen, RejectsNonHermitian) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(hermitian_eigen(Operator(SpaceLayout({{"A", 2}}), m)), LinalgError);
    EXPECT_THROW(min_eigenvalue(Operator(SpaceLayout({{"A", 2}}), m)), LinalgError);
}

class EigenReconstruction : public ::testing::TestWithParam<int> {};

TEST_P(EigenReconstruction, RelativeErrorBelowTolerance) {
    const int n = GetParam();
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    const Operator h(SpaceLayout({{"A", n}}), random_hermitian_matrix(n, rng));
    const auto e = hermitian_eigen(h);
    const Matrix rebuilt = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((rebuilt - h.matrix()).norm(), 1e-10 * h.matrix().norm());
    for (Eigen::Index k = 1; k < e.values.size(); ++k) EXPECT_GE(e.values(k - 1), e.values(k));
}

INSTANTIATE_TEST_SUITE_P(Sizes, EigenReconstruction, ::testing::Values(1, 2, 7, 64, 256, 1024));

// Minutes of single-core time; run with --gtest_also_run_disabled_tests.
TEST(EigenReconstructionLarge, DISABLED_N4096) {
    std::mt19937_64 rng(4096);
    const Operator h(SpaceLayout({{"A", 4096}}), random_hermitian_matrix(4096, rng));
    const auto e = hermitian_eigen(h);
    const Matrix rebuilt = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((rebuilt - h.matrix()).norm(), 1e-10 * h.matrix().norm());
}

TEST(HermitianEigen, DeterministicPhases) {
    std::mt19937_64 rng(11);
    const Operator h(SpaceLayout({{"A", 6}}), random_hermitian_matrix(6, rng));
    const auto a = hermitian_eigen(h), b = hermitian_eigen(h);
    EXPECT_EQ(a.vectors, b.vectors);
    for (Eigen::Index k = 0; k < 6; ++k) {
        Eigen::Index first = 0;
        while (std::abs(a.vectors(first, k)) <= 1e-12) ++first;
        EXPECT_NEAR(a.vectors(first, k).imag(), 0.0, 1e-15);
        EXPECT_GT(a.vectors(first, k).real(), 0.0);
    }
}

TEST(OneNorm, ExamplesAndNormAxioms) {
    const SpaceLayout l({{"A", 2}, {"B", 2}});
    EXPECT_EQ(entrywise_one_norm(Operator::zero(l)), 0.0);
    EXPECT_EQ(entrywise_one_norm(basis_op(l, {0, 1}, {1, 0})), 1.0);
    EXPECT_EQ(entrywise_one_norm(build_switch_choi(2).op), 256.0);

    std::mt19937_64 rng(13);
    for (int t = 0; t < 20; ++t) {
        const Operator x(l, random_matrix(4, rng)), y(l, random_matrix(4, rng));
        EXPECT_LE(entrywise_one_norm(x + y), entrywise_one_norm(x) + entrywise_one_norm(y) + 1e-12);
        const cplx a(-1.7, 0.4);
        EXPECT_NEAR(entrywise_one_norm(a * x), std::abs(a) * entrywise_one_norm(x), 1e-12 * entrywise_one_norm(x));
    }
}

TEST(MinEigenvalue, Examples) {
    const SpaceLayout l({{"A", 3}});
    EXPECT_NEAR(min_eigenvalue(Operator::identity(l)), 1.0, 1e-15);
    const auto m = Operator::ket_bra(l, 0, 0) - 2.0 * Operator::ket_bra(l, 1, 1);
    EXPECT_NEAR(min_eigenvalue(m), -2.0, 1e-14);
    EXPECT_NEAR(min_eigenvalue(build_cp_family(0.5).op), 0.0, 1e-12);
    EXPECT_TRUE(is_psd(build_cp_family(0.5).op));
    EXPECT_FALSE(is_psd(m));
}

TEST(NumericalRank, Examples) {
    EXPECT_EQ(numerical_rank(Operator::identity(SpaceLayout({{"A", 5}}))), 5u);
    EXPECT_EQ(numerical_rank(build_cp_family(1.0).op), 1u);
    std::mt19937_64 rng(17);
    Matrix cols(16, 200);
    for (int k = 0; k < 200; ++k) {
        const Matrix j = unitary_choi(haar_random_unitary(2, rng)).matrix();
        cols.col(k) = Eigen::Map<const Vector>(j.data(), 16);
    }
    EXPECT_EQ(column_rank(cols), 10u);
}

TEST(PsdProjection, NonExpansiveTowardsPsdPoints) {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 30; ++t) {
        const Matrix x = random_hermitian_matrix(6, rng), y = random_hermitian_matrix(6, rng);
        const Matrix r = random_matrix(6, rng);
        const Matrix psd = r * r.adjoint();
        const Matrix px = psd_projection(x), py = psd_projection(y);
        EXPECT_LE((px - psd).norm(), (x - psd).norm() + 1e-12);
        // firm nonexpansiveness: ||Px - Py||^2 <= <Px - Py, x - y>
        EXPECT_LE((px - py).squaredNorm(), ((px - py).adjoint() * (x - y)).trace().real() + 1e-10);
        EXPECT_GE(min_eigenvalue(Operator(SpaceLayout({{"A", 6}}), px)), -1e-12);
    }
}
