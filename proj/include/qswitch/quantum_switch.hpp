#pragma once

#include <array>
#include <cstdint>

#include "qswitch/channels.hpp"
#include "qswitch/report.hpp"

namespace qswitch {

class SwitchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Storage layout (I1, O1, I2, O2, PT, FT, PC, FC). PT/FT are the target
/// halves of the global past and future, PC/FC the control qubits.
SpaceLayout two_slot_layout(int d);
/// Slot-side layout (I1, O1, I2, O2).
SpaceLayout slot_pair_layout(int d);
/// Output-side layout (PT, FT, PC, FC).
SpaceLayout switch_output_layout(int d);

/// Process operator of a two-slot supermap in two_slot_layout(d).
struct TwoSlotProcess {
    int d = 0;
    Operator op;

    TwoSlotProcess() = default;
    TwoSlotProcess(int dim, Operator o);
};

/// Dense switch process |w><w| with |w> = sum_ijk |i j j k i k 0 0> + |j k i j i k 1 1>.
/// Only 2 <= d <= 3 is materialised; the d = 3 matrix is already 2916 x 2916.
TwoSlotProcess build_switch_choi(int d);

/// Same operator reordered as (PC, PT, I1, O1, I2, O2, FC, FT), i.e. past,
/// slots, future with P = PC (x) PT and F = FC (x) FT.
Operator to_port_order(const TwoSlotProcess& w);
TwoSlotProcess from_port_order(int d, const Operator& op);

/// Tr_in[W J^t] for an arbitrary operator J on slot_pair_layout(d); result on
/// switch_output_layout(d).
Operator two_slot_action(const TwoSlotProcess& w, const Operator& slots);

/// Relabels an operator on (PT, FT, PC, FC) as a Choi channel on P (x) F.
ChoiChannel output_as_channel(const Operator& out);

/// Output Choi of W acting on A in slot 1 and B in slot 2.
ChoiChannel apply_two_slot(const TwoSlotProcess& w, const ChoiChannel& a, const ChoiChannel& b);

/// Kraus route: {|0><0| (x) L_j K_i + |1><1| (x) K_i L_j}, control first.
ChoiChannel switch_kraus_output(const KrausChannel& k, const KrausChannel& l);

/// |0><0| (x) U2 U1 + |1><1| (x) U1 U2.
Matrix controlled_order_unitary(const Matrix& u1, const Matrix& u2);

/// Closed-form Tr_in[W0 (|ijkl><i'j'k'l'|)^t] on (PT, FT, PC, FC):
/// ket d_jk |i l 0 0> + d_il |k j 1 1>, bra likewise from the primed indices.
Operator fast_w0_action(int d, const std::array<int, 4>& ket, const std::array<int, 4>& bra);

/// The ket vector of fast_w0_action, on (PT, FT, PC, FC).
Vector fast_w0_ket(int d, const std::array<int, 4>& idx);

/// Tr_in[W0 J^t] assembled entry by entry from fast_w0_ket; works for any d.
Operator switch_action_fast(int d, const Operator& slots);

/// Haar pairs (U1, U2): distance between W applied to J_U1, J_U2 and the
/// Choi of controlled_order_unitary(U1, U2).
CertificateReport verify_unitary_action(const TwoSlotProcess& w, int trials, std::uint64_t seed,
                                        double tol = 1e-9);
CertificateReport verify_unitary_action(int d, int trials, std::uint64_t seed, double tol = 1e-9);

}  // namespace qswitch
