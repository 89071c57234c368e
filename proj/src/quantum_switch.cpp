#include "qswitch/quantum_switch.hpp"

#include <algorithm>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace qswitch {

SpaceLayout two_slot_layout(int d) {
    return SpaceLayout({{"I1", d}, {"O1", d}, {"I2", d}, {"O2", d}, {"PT", d}, {"FT", d}, {"PC", 2}, {"FC", 2}});
}

SpaceLayout slot_pair_layout(int d) { return SpaceLayout({{"I1", d}, {"O1", d}, {"I2", d}, {"O2", d}}); }

SpaceLayout switch_output_layout(int d) { return SpaceLayout({{"PT", d}, {"FT", d}, {"PC", 2}, {"FC", 2}}); }

TwoSlotProcess::TwoSlotProcess(int dim, Operator o) : d(dim), op(std::move(o)) {
    if (op.layout() != two_slot_layout(d))
        throw SwitchError("two-slot process must use layout " + to_string(two_slot_layout(d)));
}

namespace {

void require_dim(int d) {
    if (d < 2) throw SwitchError("slot dimension must be at least 2");
}

void require_index(int d, int v) {
    if (v < 0 || v >= d) throw SwitchError("basis index out of range");
}

// Flattened index into switch_output_layout(d).
Eigen::Index out_index(int d, int pt, int ft, int c) {
    return ((static_cast<Eigen::Index>(pt) * d + ft) * 2 + c) * 2 + c;
}

}  // namespace

TwoSlotProcess build_switch_choi(int d) {
    require_dim(d);
    if (d > 3) throw SwitchError("dense switch process is limited to d <= 3; use switch_action_fast");
    const auto layout = two_slot_layout(d);
    Vector w = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                w(flat_index(layout, {i, j, j, k, i, k, 0, 0})) += 1.0;
                w(flat_index(layout, {j, k, i, j, i, k, 1, 1})) += 1.0;
            }
    return TwoSlotProcess(d, Operator::outer(layout, w, w));
}

Operator to_port_order(const TwoSlotProcess& w) {
    return permute_systems(w.op, {"PC", "PT", "I1", "O1", "I2", "O2", "FC", "FT"});
}

TwoSlotProcess from_port_order(int d, const Operator& op) {
    return TwoSlotProcess(d, permute_systems(op, {"I1", "O1", "I2", "O2", "PT", "FT", "PC", "FC"}));
}

Operator two_slot_action(const TwoSlotProcess& w, const Operator& slots) {
    const int d = w.d;
    if (slots.layout() != slot_pair_layout(d)) throw SwitchError("slot operator must use layout (I1, O1, I2, O2)");
    const auto n_slot = static_cast<Eigen::Index>(slots.dim());
    const auto n_out = static_cast<Eigen::Index>(4) * d * d;
    Matrix out = Matrix::Zero(n_out, n_out);
    const Matrix& big = w.op.matrix();
    const Matrix& j = slots.matrix();
    // out[o,o'] = sum_{s,s'} W[(s,o),(s',o')] J[s,s']
    for (Eigen::Index s = 0; s < n_slot; ++s)
        for (Eigen::Index sp = 0; sp < n_slot; ++sp) {
            const cplx c = j(s, sp);
            if (c == cplx(0.0)) continue;
            out.noalias() += c * big.block(s * n_out, sp * n_out, n_out, n_out);
        }
    return Operator(switch_output_layout(d), std::move(out));
}

ChoiChannel output_as_channel(const Operator& out) {
    const auto& l = out.layout();
    if (l.size() != 4 || l.label(0) != "PT" || l.label(1) != "FT" || l.label(2) != "PC" || l.label(3) != "FC")
        throw SwitchError("output operator must use layout (PT, FT, PC, FC)");
    const int d = l.dim(0);
    const auto ordered = permute_systems(out, {"PC", "PT", "FC", "FT"});
    return ChoiChannel(ordered.relabeled(channel_layout(2 * d, 2 * d)));
}

namespace {

Operator slot_product(int d, const ChoiChannel& a, const ChoiChannel& b) {
    if (a.dim_in() != d || a.dim_out() != d || b.dim_in() != d || b.dim_out() != d)
        throw SwitchError("slot channels must act on dimension " + std::to_string(d));
    return Operator(slot_pair_layout(d), Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

}  // namespace

ChoiChannel apply_two_slot(const TwoSlotProcess& w, const ChoiChannel& a, const ChoiChannel& b) {
    return output_as_channel(two_slot_action(w, slot_product(w.d, a, b)));
}

ChoiChannel switch_kraus_output(const KrausChannel& k, const KrausChannel& l) {
    const int d = k.dim_in();
    if (k.dim_out() != d || l.dim_in() != d || l.dim_out() != d)
        throw SwitchError("switch inputs must be channels on a common dimension");
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    std::vector<Matrix> kraus;
    kraus.reserve(k.kraus().size() * l.kraus().size());
    for (const auto& ki : k.kraus())
        for (const auto& lj : l.kraus()) {
            const Matrix first = lj * ki, second = ki * lj;
            kraus.push_back(Eigen::kroneckerProduct(p0, first) + Eigen::kroneckerProduct(p1, second));
        }
    return choi_from_kraus(KrausChannel(2 * d, 2 * d, std::move(kraus)));
}

Matrix controlled_order_unitary(const Matrix& u1, const Matrix& u2) {
    const auto d = u1.rows();
    Matrix out = Matrix::Zero(2 * d, 2 * d);
    out.topLeftCorner(d, d) = u2 * u1;
    out.bottomRightCorner(d, d) = u1 * u2;
    return out;
}

Vector fast_w0_ket(int d, const std::array<int, 4>& idx) {
    require_dim(d);
    for (int v : idx) require_index(d, v);
    const auto [i, j, k, l] = idx;
    Vector v = Vector::Zero(4 * d * d);
    if (j == k) v(out_index(d, i, l, 0)) += 1.0;
    if (i == l) v(out_index(d, k, j, 1)) += 1.0;
    return v;
}

Operator fast_w0_action(int d, const std::array<int, 4>& ket, const std::array<int, 4>& bra) {
    const Vector a = fast_w0_ket(d, ket), b = fast_w0_ket(d, bra);
    return Operator::outer(switch_output_layout(d), a, b);
}

Operator switch_action_fast(int d, const Operator& slots) {
    require_dim(d);
    if (slots.layout() != slot_pair_layout(d)) throw SwitchError("slot operator must use layout (I1, O1, I2, O2)");
    const auto n_slot = static_cast<Eigen::Index>(slots.dim());
    const auto n_out = static_cast<Eigen::Index>(4) * d * d;
    // Tr_in[W0 J^t] = K J K^dag where column s of K is the W0 ket for basis tuple s.
    Matrix kets = Matrix::Zero(n_out, n_slot);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    const Eigen::Index s = ((static_cast<Eigen::Index>(i) * d + j) * d + k) * d + l;
                    if (j == k) kets(out_index(d, i, l, 0), s) += 1.0;
                    if (i == l) kets(out_index(d, k, j, 1), s) += 1.0;
                }
    return Operator(switch_output_layout(d), kets * slots.matrix() * kets.adjoint());
}

CertificateReport verify_unitary_action(const TwoSlotProcess& w, int trials, std::uint64_t seed, double tol) {
    Stopwatch clock;
    CertificateReport report("unitary-action d=" + std::to_string(w.d));
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Matrix u1 = haar_random_unitary(w.d, rng);
        const Matrix u2 = haar_random_unitary(w.d, rng);
        const auto got = apply_two_slot(w, unitary_choi(u1), unitary_choi(u2));
        const auto want = unitary_choi(controlled_order_unitary(u1, u2));
        worst = std::max(worst, choi_distance(got, want));
    }
    const Matrix id = Matrix::Identity(w.d, w.d);
    const double identity_gap =
        choi_distance(apply_two_slot(w, unitary_choi(id), unitary_choi(id)),
                      unitary_choi(Matrix::Identity(2 * w.d, 2 * w.d)));
    report.note(std::to_string(trials) + " Haar pairs, seed " + std::to_string(seed));
    report.expect_at_most("max Haar-pair Choi distance", worst, tol);
    report.expect_at_most("identity-pair Choi distance", identity_gap, tol);
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport verify_unitary_action(int d, int trials, std::uint64_t seed, double tol) {
    return verify_unitary_action(build_switch_choi(d), trials, seed, tol);
}

}  // namespace qswitch
