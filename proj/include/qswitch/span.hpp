#pragma once

#include <cstdint>
#include <vector>

#include "qswitch/channels.hpp"
#include "qswitch/report.hpp"

namespace qswitch {

class SpanError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Generator families for elements of span{J_U}.
///   A1: variant 0 -> |ii><jj|, variant 1 -> |ij><ji|; indices (i, j), i != j.
///   A2: |ij><i'j'| with indices (i, j, i', j') pairwise distinct; needs d >= 4.
///   A3: variant 1..4 over distinct (i, j, k):
///       1 -> |ii><jk|, 2 -> |ij><jk|,
///       3 -> |ij><ik| - |jj><jk| - sqrt2 (|ki> + |LL>)<jk|,
///       4 -> |ij><kj| - |ii><ki| - sqrt2 (|jk> + |LL>)<ki|, with |LL> = sum_{l != i,j,k} |ll>.
///       The sqrt2 terms are A3.1/A3.2 elements, so 3 and 4 put the bare differences in the span.
///   A4: indices (k), 0 <= k < d -> sum_i |i,i+k><i,i+k|.
///   A5: variant 1 -> |ij><ii| + |ji><ii| - |jj><ij| - |jj><ji|,
///       variant 2 -> -|ij><ii| + |ji><ii| - |jj><ij| + |jj><ji|; indices (i, j), i != j.
enum class Lemma { A1, A2, A3, A4, A5 };

std::string to_string(Lemma l);

/// A family |psi(phases)> whose weighted phase average is a target operator.
/// Every |psi> reshapes to a scaled unitary, so |psi><psi| is a multiple of some J_U.
class SpanGenerator {
public:
    SpanGenerator(Lemma lemma, int variant, std::vector<int> indices, int d);

    Lemma lemma() const { return lemma_; }
    int variant() const { return variant_; }
    const std::vector<int>& indices() const { return indices_; }
    int d() const { return d_; }
    int phase_count() const;
    /// Smallest per-phase grid size on which the discrete average is exact.
    int min_grid() const;
    /// Grid size used by default.
    int default_grid() const { return lemma_ == Lemma::A4 ? 3 : 4; }

    /// Unnormalised vector on I (x) O, indexed (a, b) -> a * d + b.
    Vector state(const std::vector<double>& phases) const;
    cplx weight(const std::vector<double>& phases) const;
    /// Target operator on I (x) O, up to a positive scale.
    Matrix target() const;
    std::string describe() const;

private:
    Lemma lemma_;
    int variant_;
    std::vector<int> indices_;
    int d_;
};

SpanGenerator build_span_generator(Lemma lemma, int variant, std::vector<int> indices, int d);

/// Every generator of every family at dimension d.
std::vector<SpanGenerator> all_span_generators(int d);

/// (1 / N^p) sum over the N^p grid of weight * |psi><psi|. Throws if N < min_grid().
Matrix phase_average(const SpanGenerator& gen, int grid);
/// Same average, also returning the worst scaled-unitary defect over the grid points.
Matrix phase_average(const SpanGenerator& gen, int grid, double& worst_unitary_defect);

/// ||M M^dag - c I||_F / c with c = Tr(M M^dag) / d, for M the reshaped state.
double scaled_unitary_defect(const Vector& psi, int d);

/// Relative distance of `avg` from the nearest positive multiple of `target`.
/// Returns +inf when the best multiple is not real positive.
double scale_normalised_residual(const Matrix& avg, const Matrix& target);

/// Numerical rank of the Gram matrix of `samples` vectorised Haar J_U.
int estimate_span_dimension(int d, int samples, std::uint64_t seed);

/// Orthonormal basis of span{J_U} from Haar samples.
class SpanBasis {
public:
    /// samples <= 0 selects 4 (d^2 - 1)^2 + 4.
    SpanBasis(int d, std::uint64_t seed, int samples = 0, double rank_tol = 1e-10);

    int d() const { return d_; }
    int rank() const { return static_cast<int>(basis_.cols()); }
    /// Columns are vectorised operators on I (x) O (column-major vec).
    const Matrix& basis() const { return basis_; }
    /// ||x - P x|| / ||x|| for the vectorisation x of op; 0 for op = 0.
    double residual(const Matrix& op) const;

private:
    int d_;
    Matrix basis_;
};

double membership_residual(const Matrix& op, int d, int samples, std::uint64_t seed);
double membership_residual(const Operator& op, int d, int samples, std::uint64_t seed);

/// Items of the summary list of span elements at dimension d. With
/// `literal` the third item is taken as the single ket-bras |ij><i'j'| with
/// exactly two equal indices; otherwise the i = i' and j = j' patterns are
/// replaced by the difference operators that the A3 generators produce.
std::vector<Matrix> span_summary_list(int d, bool literal);

/// Count 2d(d-1) + d(d-1)(d-2)(d-3) + 6d(d-1)(d-2) + d + 2d(d-1) = d(d^3 - 3d + 3).
long long span_summary_count(int d);

CertificateReport verify_span_lemmas(int d, std::uint64_t seed = 1);

enum class GroupId { G1, G2, G3, G3a, G3b };

std::string to_string(GroupId g);

/// One term c |a b><a' b'| of a group element.
struct KetBraTerm {
    std::array<int, 2> ket;
    std::array<int, 2> bra;
    double coeff = 1.0;
};

struct GroupElement {
    GroupId group;
    std::vector<int> indices;
    std::vector<KetBraTerm> terms;
    Operator op;  // on channel_layout(d, d)
};

/// G1: ket-bras |ij><i'j'| that are neither diagonal nor have exactly three equal indices.
/// G2: sum_i |i,i+m><i,i+m|, m = 0..d-1.
/// G3a: |kl><kk| - |ll><lk|, G3b: |lk><kk| - |ll><kl| (k != l); G3 is their union.
std::vector<GroupElement> build_group(GroupId g, int d);

long long group_size_formula(GroupId g, int d);

}  // namespace qswitch
