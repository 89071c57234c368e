#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qswitch/quantum_switch.hpp"
#include "qswitch/span.hpp"

namespace qswitch {

class UniquenessError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Layout (I, O, P, F), each of dimension d.
SpaceLayout one_slot_layout(int d);

/// Process operator of a one-slot supermap acting by J -> Tr_IO[C J^t].
struct OneSlotProcess {
    int d = 0;
    Operator op;

    OneSlotProcess() = default;
    OneSlotProcess(int dim, Operator o);
};

/// Tr_IO[C J^t] for an arbitrary operator J on I (x) O; the result is on P (x) F.
Matrix one_slot_action(const OneSlotProcess& c, const Matrix& j);
/// Same, read as a channel from P to F.
ChoiChannel apply_one_slot(const OneSlotProcess& c, const ChoiChannel& j);

/// C0 = sum_ijkl |ij><kl| (x) |ij><kl|.
OneSlotProcess build_identity_process(int d);

/// Replays the facts the identity-supermap uniqueness argument consumes,
/// evaluated on the given process. Five checks, see the implementation.
CertificateReport certify_identity_uniqueness(const OneSlotProcess& c, double tol = 1e-10);
CertificateReport certify_identity_uniqueness(int d, double tol = 1e-10);

enum class DiagonalSetId { S1, S2, S3, S4, S5, S6, S7 };

std::string to_string(DiagonalSetId s);

/// Basis tuples (I1, O1, I2, O2, PT, FT, PC, FC) on which the diagonal of the
/// switch process is forced to 1.
struct DiagonalSet {
    DiagonalSetId id;
    std::vector<std::array<int, 8>> members;
};

DiagonalSet build_diagonal_set(DiagonalSetId id, int d);
/// |S1| = 2d(d-1)^2, |S2..S5| = d(d-1), |S6| = |S7| = d.
long long diagonal_set_size_formula(DiagonalSetId id, int d);

/// Diagonal part of the switch uniqueness argument, evaluated on `w`.
CertificateReport diagonal_certificate(const TwoSlotProcess& w, double tol = 1e-10);
CertificateReport diagonal_certificate(int d, double tol = 1e-10);

/// |G1|, |G2|, |G3| against their closed forms and |G1| + d|G2| + 2|G3| = d^4.
CertificateReport group_count_certificate(int d);

/// The six group sums sum_{J in Ga (x) Gb} ||Tr_in W0 J^t||_1 for a <= b, in
/// the order (11, 12, 22, 13, 23, 33).
std::array<long long, 6> group_sum_formulas(int d);

struct GroupSums {
    std::array<std::array<double, 3>, 3> ordered{};  // [a][b] = sum over G_{a+1} (x) G_{b+1}
    double g1_g3a = 0.0;
    double g1_g3b = 0.0;

    /// (11, 12, 22, 13, 23, 33).
    std::array<double, 6> six() const;
    /// Sum over all nine ordered pairs.
    double ordered_total() const;
    /// Sum of the six a <= b entries.
    double unordered_total() const;
};

/// Group sums from the closed-form W0 action; 2 <= d <= 4.
GroupSums group_sums_fast(int d);
/// Group sums from the dense contraction against an arbitrary process.
GroupSums group_sums_dense(const TwoSlotProcess& w);

CertificateReport offdiagonal_certificate(int d);
CertificateReport offdiagonal_certificate(const TwoSlotProcess& w);

struct SwitchCertificateOptions {
    int trials = 200;
    std::uint64_t seed = 7;
    bool include_probe = true;  // only honoured at d = 2
    int probe_starts = 10;
    double tol = 1e-9;
};

/// Aggregate of the unitary action, span lemmas, diagonal and off-diagonal
/// certificates (and the probe at d = 2) for the given process.
CertificateReport certify_switch_uniqueness(const TwoSlotProcess& w, const SwitchCertificateOptions& opt = {});
CertificateReport certify_switch_uniqueness(int d, const SwitchCertificateOptions& opt = {});

enum class DerivedKind { sandwich, transpose, conjugate_qubit };

std::string to_string(DerivedKind k);

/// Which one-slot process to derive from C0. For sandwich, U -> B U A.
struct DerivedSpec {
    DerivedKind kind = DerivedKind::transpose;
    Matrix a;
    Matrix b;

    static DerivedSpec sandwich(Matrix a, Matrix b) { return {DerivedKind::sandwich, std::move(a), std::move(b)}; }
    static DerivedSpec transpose() { return {DerivedKind::transpose, {}, {}}; }
    static DerivedSpec conjugate_qubit() { return {DerivedKind::conjugate_qubit, {}, {}}; }
};

/// sandwich: (A_I (x) B_F) C0 (A_I (x) B_F)^dag; transpose: F_IO C0 F_IO^dag;
/// conjugate_qubit: sandwich with A = B = Y.
OneSlotProcess build_derived_one_slot(const DerivedSpec& spec, int d);

/// The claimed extension on an arbitrary channel: B o L o A, F J_L F, or Y o L o Y.
ChoiChannel derived_extension(const DerivedSpec& spec, const ChoiChannel& lambda);

/// Haar unitaries plus the replace-zero channel. For sandwich with empty A, B
/// the pair is drawn from `seed`.
CertificateReport verify_corollary(DerivedSpec spec, int d, int trials, std::uint64_t seed, double tol = 1e-9);

/// C_p = M_p (x) phi+ at d = 2, with M_p the 4 x 4 matrix with ones on the
/// diagonal and anti-diagonal, p elsewhere, and phi+ the normalised
/// maximally entangled state on P (x) F.
OneSlotProcess build_cp_family(double p);
Matrix cp_factor(double p);

CertificateReport cp_family_certificate(int grid_points = 101, int trials = 50, std::uint64_t seed = 11,
                                        double tol = 1e-10);

/// Depolarizing-sandwich circuits: D o L o D and id o L o D.
CertificateReport fig1_demo(int trials, std::uint64_t seed, double tol = 1e-10);

}  // namespace qswitch
