#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qswitch/channels.hpp"

using namespace qswitch;

namespace {

Matrix random_density(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) m(r, c) = cplx(g(rng), g(rng));
    Matrix rho = m * m.adjoint();
    return rho / rho.trace();
}

double unitarity_defect(const Matrix& u) {
    return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

}  // namespace

TEST(KrausChannel, RejectsRaggedOrEmpty) {
    EXPECT_THROW(KrausChannel(2, 2, {}), ChannelError);
    EXPECT_THROW(KrausChannel(2, 2, {Matrix::Identity(2, 2), Matrix::Identity(3, 3)}), ChannelError);
    EXPECT_THROW(KrausChannel(2, 3, {Matrix::Identity(2, 2)}), ChannelError);
}

TEST(ChoiFromKraus, IdentityChannel) {
    const auto j = choi_from_kraus(standard_channel(ChannelKind::identity, 2));
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) EXPECT_EQ(j.matrix()(3 * i, 3 * k), cplx(1.0));
    EXPECT_NEAR(j.op().trace().real(), 2.0, 0.0);
}

TEST(ChoiFromKraus, DepolarizingFromPaulis) {
    std::vector<Matrix> kraus;
    for (int k = 0; k < 4; ++k) kraus.push_back(pauli_matrix(k) / 2.0);
    const auto j = choi_from_kraus(KrausChannel(2, 2, kraus));
    EXPECT_LE((j.matrix() - Matrix::Identity(4, 4) / 2.0).norm(), 1e-15);
    EXPECT_NEAR(j.op().trace().real(), 2.0, 1e-15);
    EXPECT_LE((choi_from_kraus(standard_channel(ChannelKind::depolarizing, 2)).matrix() - j.matrix()).norm(), 1e-14);
}

TEST(ChoiFromKraus, ReplaceZero) {
    const auto j = choi_from_kraus(standard_channel(ChannelKind::replace_zero, 2));
    Vector zero = Vector::Zero(2);
    zero(0) = 1.0;
    EXPECT_LE((j.matrix() - oracle::replace_choi(zero)).norm(), 0.0);
}

TEST(ChoiFromKraus, MatchesBasisOracleAndTraceIdentity) {
    std::mt19937_64 rng(21);
    for (int d : {2, 3}) {
        for (int rank : {1, 2, d * d}) {
            const auto ch = random_cptp_channel(d, rank, rng);
            const auto j = choi_from_kraus(ch);
            EXPECT_LE((j.matrix() - oracle::choi_by_basis(ch)).norm(), 1e-12);
            double fro = 0.0;
            for (const auto& k : ch.kraus()) fro += k.squaredNorm();
            EXPECT_NEAR(j.op().trace().real(), fro, 1e-12);
            EXPECT_TRUE(j.is_cp());
            EXPECT_TRUE(j.is_trace_preserving());
        }
    }
}

TEST(KrausFromChoi, UnitaryGivesOneProportionalOperator) {
    std::mt19937_64 rng(23);
    const Matrix u = haar_random_unitary(3, rng);
    const auto k = kraus_from_choi(unitary_choi(u));
    ASSERT_EQ(k.kraus().size(), 1u);
    const Matrix& a = k.kraus()[0];
    const cplx ratio = (u.adjoint() * a).trace() / 3.0;
    EXPECT_NEAR(std::abs(ratio), 1.0, 1e-12);
    EXPECT_LE((a - ratio * u).norm(), 1e-12);
}

TEST(KrausFromChoi, DepolarizingHasFourOperators) {
    EXPECT_EQ(kraus_from_choi(choi_from_kraus(standard_channel(ChannelKind::depolarizing, 2))).kraus().size(), 4u);
}

TEST(KrausFromChoi, RoundTripOnRandomChannels) {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 50; ++t) {
        const int d = 2 + t % 2;
        const int rank = 1 + t % (d * d);
        const auto j = choi_from_kraus(random_cptp_channel(d, rank, rng));
        const auto k = kraus_from_choi(j);
        EXPECT_EQ(k.kraus().size(), numerical_rank(j.op()));
        const auto back = choi_from_kraus(k);
        EXPECT_LE(choi_distance(back, j), 1e-9);
        EXPECT_LE(choi_distance(choi_from_kraus(kraus_from_choi(back)), back), 1e-9);
    }
}

TEST(KrausFromChoi, RejectsNonPsd) {
    Matrix m = Matrix::Identity(4, 4);
    m(0, 0) = -1.0;
    EXPECT_THROW(kraus_from_choi(ChoiChannel::from_matrix(2, 2, m)), ChannelError);
}

TEST(ApplyChannel, ExamplesAndRouteAgreement) {
    std::mt19937_64 rng(27);
    const Matrix rho = random_density(2, rng);
    const auto id = standard_channel(ChannelKind::identity, 2);
    EXPECT_LE((apply_channel(id, rho) - rho).norm(), 1e-15);

    const auto dep = standard_channel(ChannelKind::depolarizing, 2);
    EXPECT_LE((apply_channel(dep, rho) - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);
    EXPECT_LE((apply_channel(choi_from_kraus(dep), rho) - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);

    Matrix plus = Matrix::Constant(2, 2, 0.5);
    Matrix zero = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    EXPECT_LE((apply_channel(standard_channel(ChannelKind::replace_zero, 2), plus) - zero).norm(), 1e-15);

    for (int t = 0; t < 20; ++t) {
        const int d = 2 + t % 3;
        const auto ch = random_cptp_channel(d, 1 + t % 4, rng);
        Matrix x = Matrix::Random(d, d);  // linear extension, not a state
        EXPECT_LE((apply_channel(ch, x) - apply_channel(choi_from_kraus(ch), x)).norm(), 1e-10);
    }
    EXPECT_THROW(apply_channel(id, Matrix::Identity(3, 3)), ChannelError);
}

TEST(ApplyChannel, UnitaryChoiActsByConjugation) {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 30; ++t) {
        const int d = 2 + t % 3;
        const Matrix u = haar_random_unitary(d, rng);
        const Matrix rho = random_density(d, rng);
        EXPECT_LE((apply_channel(unitary_choi(u), rho) - u * rho * u.adjoint()).norm(), 1e-10);
    }
}

TEST(ComposeChannels, DepolarizingAbsorbsUnitaries) {
    std::mt19937_64 rng(31);
    const auto dep = choi_from_kraus(standard_channel(ChannelKind::depolarizing, 2));
    for (int t = 0; t < 100; ++t) {
        const auto u = unitary_choi(haar_random_unitary(2, rng));
        EXPECT_LE(choi_distance(compose_channels(dep, compose_channels(u, dep)), dep), 1e-10);
        EXPECT_LE(choi_distance(compose_channels(u, dep), dep), 1e-10);
    }
}

TEST(ComposeChannels, ReplaceZeroCircuits) {
    const auto dep = choi_from_kraus(standard_channel(ChannelKind::depolarizing, 2));
    const auto lam = choi_from_kraus(standard_channel(ChannelKind::replace_zero, 2));
    const auto id = choi_from_kraus(standard_channel(ChannelKind::identity, 2));
    EXPECT_LE(choi_distance(compose_channels(id, compose_channels(lam, dep)), lam), 1e-12);
    EXPECT_LE(choi_distance(compose_channels(dep, compose_channels(lam, dep)), dep), 1e-12);
}

TEST(ComposeChannels, MatchesKrausProductsAndIsAssociative) {
    std::mt19937_64 rng(33);
    const auto a = random_cptp_channel(3, 2, rng), b = random_cptp_channel(3, 3, rng), c = random_cptp_channel(3, 1, rng);
    std::vector<Matrix> prod;
    for (const auto& kb : b.kraus())
        for (const auto& ka : a.kraus()) prod.push_back(kb * ka);
    const auto expected = oracle::choi_by_basis(KrausChannel(3, 3, prod));
    EXPECT_LE((compose_channels(choi_from_kraus(b), choi_from_kraus(a)).matrix() - expected).norm(), 1e-12);
    EXPECT_LE((compose_channels(b, a).matrix() - expected).norm(), 1e-12);

    const auto ja = choi_from_kraus(a), jb = choi_from_kraus(b), jc = choi_from_kraus(c);
    EXPECT_LE(choi_distance(compose_channels(jc, compose_channels(jb, ja)), compose_channels(compose_channels(jc, jb), ja)),
              1e-12);
    EXPECT_THROW(compose_channels(jc, choi_from_kraus(standard_channel(ChannelKind::identity, 2))), ChannelError);
}

TEST(UnitaryChoi, Examples) {
    const auto ji = unitary_choi(Matrix::Identity(2, 2));
    EXPECT_LE((ji.matrix() - oracle::unitary_choi(Matrix::Identity(2, 2))).norm(), 0.0);
    EXPECT_EQ(ji.matrix()(0, 3), cplx(1.0));

    const auto jx = unitary_choi(pauli_matrix(1));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const bool support = (r == 1 || r == 2) && (c == 1 || c == 2);
            EXPECT_EQ(jx.matrix()(r, c), cplx(support ? 1.0 : 0.0));
        }

    for (int d : {2, 3, 4, 5}) {
        const auto jf = unitary_choi(fourier_matrix(d));
        EXPECT_LE((jf.matrix() - oracle::unitary_choi(fourier_matrix(d))).norm(), 1e-14);
        EXPECT_NEAR(jf.matrix().cwiseAbs().minCoeff(), 1.0 / d, 1e-14);
        EXPECT_NEAR(jf.matrix().cwiseAbs().maxCoeff(), 1.0 / d, 1e-14);
        EXPECT_EQ(numerical_rank(jf.op()), 1u);
        EXPECT_NEAR(jf.op().trace().real(), d, 1e-12);
    }
    EXPECT_THROW(unitary_choi(Matrix::Constant(2, 2, 1.0)), ChannelError);
}

TEST(UnitaryChoi, DoubleKetConvention) {
    std::mt19937_64 rng(35);
    const Matrix u = haar_random_unitary(3, rng);
    const Vector v = double_ket(u);
    for (int i = 0; i < 3; ++i)
        for (int o = 0; o < 3; ++o) EXPECT_EQ(v(i * 3 + o), u(o, i));
    EXPECT_LE((unitary_choi(u).matrix() - v * v.adjoint()).norm(), 1e-15);
}

TEST(HaarRandomUnitary, UnitaryAndDeterministic) {
    const Matrix one = haar_random_unitary(1, std::uint64_t{5});
    EXPECT_NEAR(std::abs(one(0, 0)), 1.0, 1e-12);
    for (int d : {2, 3, 8}) {
        const Matrix a = haar_random_unitary(d, std::uint64_t{99}), b = haar_random_unitary(d, std::uint64_t{99});
        EXPECT_LE(unitarity_defect(a), 1e-12);
        EXPECT_EQ(a, b);
    }
    EXPECT_NE(haar_random_unitary(2, std::uint64_t{1}), haar_random_unitary(2, std::uint64_t{2}));
}

TEST(HaarRandomUnitary, FirstAndSecondMoments) {
    // E[U (x) U*] = |I>><<I| / d, E[U] = 0 and E[|U_ij|^2] = 1/d.
    std::mt19937_64 rng(37);
    const int n = 10000, d = 2;
    Matrix mean = Matrix::Zero(4, 4);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(4, 4);
    Matrix first = Matrix::Zero(2, 2);
    for (int t = 0; t < n; ++t) {
        const Matrix u = haar_random_unitary(d, rng);
        const Matrix k = oracle::kron(u, u.conjugate());
        mean += k;
        second += k.cwiseAbs2();
        first += u;
    }
    mean /= double(n);
    first /= double(n);
    Matrix expected = Matrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) expected(i * 2 + i, j * 2 + j) = 0.5;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const double var = second(r, c) / n - std::norm(mean(r, c));
            const double se = std::sqrt(std::max(var, 1e-30) / n);
            EXPECT_LE(std::abs(mean(r, c) - expected(r, c)), 3.0 * se + 1e-12) << r << "," << c;
        }
    // entries of U have E|U_ij|^2 = 1/2 so the standard error of the mean is sqrt(1/2n)
    EXPECT_LE(first.cwiseAbs().maxCoeff(), 3.0 * std::sqrt(0.5 / n) * std::sqrt(2.0));
}

TEST(StandardChannel, DefiningActions) {
    std::mt19937_64 rng(39);
    const auto dep3 = standard_channel(ChannelKind::depolarizing, 3);
    EXPECT_TRUE(dep3.is_trace_preserving());
    EXPECT_LE((apply_channel(dep3, random_density(3, rng)) - Matrix::Identity(3, 3) / 3.0).norm(), 1e-12);

    const auto lam = standard_channel(ChannelKind::replace_zero, 2);
    Matrix two_zero = Matrix::Zero(2, 2);
    two_zero(0, 0) = 2.0;
    EXPECT_LE((apply_channel(lam, Matrix::Identity(2, 2)) - two_zero).norm(), 1e-12);
    EXPECT_GT((apply_channel(lam, Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)).norm(), 1.0);

    const auto y = standard_channel(ChannelKind::pauli_unitary, 2, 2);
    EXPECT_LE((choi_from_kraus(y).matrix() - oracle::unitary_choi(pauli_matrix(2))).norm(), 1e-15);
    Matrix py(2, 2);
    py << 0, cplx(0, -1), cplx(0, 1), 0;
    EXPECT_EQ(pauli_matrix(2), py);

    const auto f = standard_channel(ChannelKind::fourier_unitary, 3);
    EXPECT_LE((choi_from_kraus(f).matrix() - oracle::unitary_choi(fourier_matrix(3))).norm(), 1e-14);

    for (auto kind : {ChannelKind::identity, ChannelKind::depolarizing, ChannelKind::replace_zero,
                      ChannelKind::fourier_unitary}) {
        for (int d : {2, 3}) {
            EXPECT_TRUE(standard_channel(kind, d).is_trace_preserving());
            EXPECT_TRUE(choi_from_kraus(standard_channel(kind, d)).is_trace_preserving());
        }
    }
    EXPECT_THROW(standard_channel(ChannelKind::pauli_unitary, 3, 1), ChannelError);
    EXPECT_THROW(standard_channel(ChannelKind::pauli_unitary, 2, 4), ChannelError);
}

TEST(FlipOperator, Examples) {
    const Operator f = flip_operator(2);
    Vector e01 = Vector::Zero(4), e10 = Vector::Zero(4);
    e01(1) = 1.0;
    e10(2) = 1.0;
    EXPECT_EQ(Vector(f.matrix() * e01), e10);
    for (int d : {1, 2, 3}) {
        const Operator fd = flip_operator(d);
        EXPECT_EQ(Matrix(fd.matrix() * fd.matrix()), Matrix::Identity(d * d, d * d));
    }
    Matrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    const Matrix jh = unitary_choi(h).matrix();
    EXPECT_LE((f.matrix() * jh * f.matrix() - oracle::unitary_choi(h.transpose())).norm(), 1e-15);
    EXPECT_LE((f.matrix() * jh * f.matrix() - jh).norm(), 1e-15);
}

TEST(FlipOperator, ConjugationTransposesUnitary) {
    std::mt19937_64 rng(41);
    const Operator f = flip_operator(3);
    for (int t = 0; t < 10; ++t) {
        const Matrix u = haar_random_unitary(3, rng);
        EXPECT_LE((f.matrix() * unitary_choi(u).matrix() * f.matrix() - oracle::unitary_choi(u.transpose())).norm(),
                  1e-13);
    }
}
