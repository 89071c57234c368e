#include "qswitch/channels.hpp"

#include <cmath>
#include <numbers>

namespace qswitch {

KrausChannel::KrausChannel(int dim_in, int dim_out, std::vector<Matrix> kraus)
    : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
    if (dim_in_ <= 0 || dim_out_ <= 0) throw ChannelError("non-positive channel dimension");
    if (kraus_.empty()) throw ChannelError("empty Kraus set");
    for (const auto& k : kraus_)
        if (k.rows() != dim_out_ || k.cols() != dim_in_)
            throw ChannelError("ragged Kraus operator dimensions");
}

bool KrausChannel::is_trace_preserving(double tol) const {
    Matrix sum = Matrix::Zero(dim_in_, dim_in_);
    for (const auto& k : kraus_) sum += k.adjoint() * k;
    return (sum - Matrix::Identity(dim_in_, dim_in_)).norm() <= tol;
}

SpaceLayout channel_layout(int dim_in, int dim_out) { return SpaceLayout({{"I", dim_in}, {"O", dim_out}}); }

ChoiChannel::ChoiChannel(Operator op) : op_(std::move(op)) {
    const auto& l = op_.layout();
    if (l.size() != 2 || l.label(0) != "I" || l.label(1) != "O")
        throw ChannelError("Choi operator must have layout [I, O], got " + to_string(l));
}

ChoiChannel ChoiChannel::from_matrix(int dim_in, int dim_out, Matrix entries) {
    return ChoiChannel(Operator(channel_layout(dim_in, dim_out), std::move(entries)));
}

bool ChoiChannel::is_cp(const Tolerances& tol) const { return is_psd(op_, tol); }

bool ChoiChannel::is_trace_preserving(double tol) const {
    const auto reduced = partial_trace(op_, {"O"});
    return (reduced.matrix() - Matrix::Identity(dim_in(), dim_in())).norm() <= tol;
}

double choi_distance(const ChoiChannel& a, const ChoiChannel& b) {
    if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
        throw ChannelError("Choi distance between channels of different shape");
    return (a.matrix() - b.matrix()).norm();
}

namespace {

Vector vectorise(const Matrix& k) {
    const auto din = k.cols(), dout = k.rows();
    Vector v(din * dout);
    for (Eigen::Index i = 0; i < din; ++i)
        for (Eigen::Index o = 0; o < dout; ++o) v(i * dout + o) = k(o, i);
    return v;
}

}  // namespace

Vector double_ket(const Matrix& u) { return vectorise(u); }

ChoiChannel choi_from_kraus(const KrausChannel& ch) {
    const auto n = static_cast<Eigen::Index>(ch.dim_in()) * ch.dim_out();
    Matrix j = Matrix::Zero(n, n);
    for (const auto& k : ch.kraus()) {
        const Vector v = vectorise(k);
        j += v * v.adjoint();
    }
    return ChoiChannel::from_matrix(ch.dim_in(), ch.dim_out(), std::move(j));
}

KrausChannel kraus_from_choi(const ChoiChannel& j, double tol, const Tolerances& psd) {
    const auto eig = hermitian_eigen(j.op(), psd);
    if (eig.values(eig.values.size() - 1) < -psd.psd) throw ChannelError("Choi operator is not PSD");
    const double largest = eig.values.cwiseAbs().maxCoeff();
    std::vector<Matrix> kraus;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        if (std::abs(eig.values(k)) <= tol * largest) continue;
        const double scale = std::sqrt(eig.values(k));
        Matrix op(j.dim_out(), j.dim_in());
        for (int i = 0; i < j.dim_in(); ++i)
            for (int o = 0; o < j.dim_out(); ++o) op(o, i) = scale * eig.vectors(i * j.dim_out() + o, k);
        kraus.push_back(std::move(op));
    }
    if (kraus.empty()) kraus.push_back(Matrix::Zero(j.dim_out(), j.dim_in()));
    return KrausChannel(j.dim_in(), j.dim_out(), std::move(kraus));
}

Matrix apply_channel(const KrausChannel& ch, const Matrix& rho) {
    if (rho.rows() != ch.dim_in() || rho.cols() != ch.dim_in())
        throw ChannelError("state dimension does not match channel input");
    Matrix out = Matrix::Zero(ch.dim_out(), ch.dim_out());
    for (const auto& k : ch.kraus()) out += k * rho * k.adjoint();
    return out;
}

Matrix apply_channel(const ChoiChannel& ch, const Matrix& rho) {
    const int din = ch.dim_in(), dout = ch.dim_out();
    if (rho.rows() != din || rho.cols() != din)
        throw ChannelError("state dimension does not match channel input");
    Matrix out = Matrix::Zero(dout, dout);
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            if (rho(i, j) == cplx(0.0)) continue;
            out += rho(i, j) * ch.matrix().block(i * dout, j * dout, dout, dout);
        }
    return out;
}

ChoiChannel compose_channels(const ChoiChannel& second, const ChoiChannel& first) {
    if (first.dim_out() != second.dim_in()) throw ChannelError("composition dimension mismatch");
    const int din = first.dim_in(), mid = first.dim_out(), dout = second.dim_out();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(din) * dout, static_cast<Eigen::Index>(din) * dout);
    // J_{BA}[(i,o),(j,o')] = sum_{m,m'} J_A[(i,m),(j,m')] J_B[(m,o),(m',o')]
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            auto block = out.block(i * dout, j * dout, dout, dout);
            for (int m = 0; m < mid; ++m)
                for (int mp = 0; mp < mid; ++mp) {
                    const cplx a = first.matrix()(i * mid + m, j * mid + mp);
                    if (a == cplx(0.0)) continue;
                    block += a * second.matrix().block(m * dout, mp * dout, dout, dout);
                }
        }
    return ChoiChannel::from_matrix(din, dout, std::move(out));
}

ChoiChannel compose_channels(const KrausChannel& second, const KrausChannel& first) {
    return compose_channels(choi_from_kraus(second), choi_from_kraus(first));
}

ChoiChannel unitary_choi(const Matrix& u) {
    if (u.rows() != u.cols()) throw ChannelError("unitary must be square");
    const auto d = u.rows();
    if ((u.adjoint() * u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
        throw ChannelError("matrix is not unitary");
    const Vector v = vectorise(u);
    return ChoiChannel::from_matrix(static_cast<int>(d), static_cast<int>(d), v * v.adjoint());
}

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Matrix z(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = cplx(re, im);
        }
    return z;
}

// Q factor with the phases of diag(R) divided out, which makes the
// distribution of Q the Haar measure on isometries.
Matrix phase_corrected_q(const Matrix& z) {
    Eigen::HouseholderQR<Matrix> qr(z);
    const Matrix q = qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
    const Matrix r = qr.matrixQR();
    Matrix out = q;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
        const cplx diag = r(k, k);
        const double mag = std::abs(diag);
        out.col(k) *= mag > 0.0 ? diag / mag : cplx(1.0);
    }
    return out;
}

}  // namespace

Matrix haar_random_unitary(int d, std::mt19937_64& rng) {
    if (d < 1) throw ChannelError("dimension must be positive");
    return phase_corrected_q(gaussian_matrix(d, d, rng));
}

Matrix haar_random_unitary(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return haar_random_unitary(d, rng);
}

KrausChannel random_cptp_channel(int d, int kraus_rank, std::mt19937_64& rng) {
    if (d < 1 || kraus_rank < 1) throw ChannelError("invalid random channel shape");
    const Matrix v = phase_corrected_q(gaussian_matrix(static_cast<Eigen::Index>(kraus_rank) * d, d, rng));
    std::vector<Matrix> kraus;
    for (int k = 0; k < kraus_rank; ++k) kraus.push_back(v.block(k * d, 0, d, d));
    return KrausChannel(d, d, std::move(kraus));
}

Matrix pauli_matrix(int index) {
    const cplx i(0.0, 1.0);
    Matrix m(2, 2);
    switch (index) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -i, i, 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: throw ChannelError("Pauli index must be in 0..3");
    }
    return m;
}

Matrix fourier_matrix(int d) {
    Matrix f(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            f(j, k) = norm * std::polar(1.0, 2.0 * std::numbers::pi * j * k / d);
    return f;
}

KrausChannel standard_channel(ChannelKind kind, int d, int pauli) {
    if (d < 1) throw ChannelError("dimension must be positive");
    switch (kind) {
        case ChannelKind::identity:
            return KrausChannel(d, d, {Matrix::Identity(d, d)});
        case ChannelKind::depolarizing: {
            // Weyl operators X^a Z^b / d average to rho -> Tr(rho) I / d.
            std::vector<Matrix> kraus;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    Matrix w = Matrix::Zero(d, d);
                    for (int k = 0; k < d; ++k)
                        w((k + a) % d, k) = std::polar(1.0, 2.0 * std::numbers::pi * b * k / d) / double(d);
                    kraus.push_back(std::move(w));
                }
            return KrausChannel(d, d, std::move(kraus));
        }
        case ChannelKind::replace_zero: {
            std::vector<Matrix> kraus;
            for (int i = 0; i < d; ++i) {
                Matrix k = Matrix::Zero(d, d);
                k(0, i) = 1.0;
                kraus.push_back(std::move(k));
            }
            return KrausChannel(d, d, std::move(kraus));
        }
        case ChannelKind::fourier_unitary:
            return KrausChannel(d, d, {fourier_matrix(d)});
        case ChannelKind::pauli_unitary:
            if (d != 2) throw ChannelError("Pauli channels require d = 2");
            return KrausChannel(2, 2, {pauli_matrix(pauli)});
    }
    throw ChannelError("unsupported channel kind");
}

Operator flip_operator(int d, const std::string& first, const std::string& second) {
    if (d < 1) throw ChannelError("dimension must be positive");
    SpaceLayout layout({{first, d}, {second, d}});
    Matrix f = Matrix::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) f(b * d + a, a * d + b) = 1.0;
    return Operator(std::move(layout), std::move(f));
}

}  // namespace qswitch
