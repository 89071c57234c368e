#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qswitch/linalg.hpp"

namespace qswitch {

class ChannelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// CP map rho -> sum_k K_k rho K_k^dag. Each K_k is dim_out x dim_in.
class KrausChannel {
public:
    KrausChannel(int dim_in, int dim_out, std::vector<Matrix> kraus);

    int dim_in() const { return dim_in_; }
    int dim_out() const { return dim_out_; }
    const std::vector<Matrix>& kraus() const { return kraus_; }
    bool is_trace_preserving(double tol = 1e-10) const;

private:
    int dim_in_;
    int dim_out_;
    std::vector<Matrix> kraus_;
};

/// Choi operator J = sum_ij |i><j| (x) Lambda(|i><j|) on layout [(I, dim_in), (O, dim_out)].
/// Unnormalised: Tr J = dim_in for trace-preserving maps.
class ChoiChannel {
public:
    explicit ChoiChannel(Operator op);
    static ChoiChannel from_matrix(int dim_in, int dim_out, Matrix entries);

    const Operator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }
    int dim_in() const { return op_.layout().dim(0); }
    int dim_out() const { return op_.layout().dim(1); }
    bool is_cp(const Tolerances& tol = {}) const;
    bool is_trace_preserving(double tol = 1e-10) const;

private:
    Operator op_;
};

SpaceLayout channel_layout(int dim_in, int dim_out);

/// Frobenius distance between two Choi operators of equal shape.
double choi_distance(const ChoiChannel& a, const ChoiChannel& b);

ChoiChannel choi_from_kraus(const KrausChannel& ch);
/// Eigenvalues below tol * lambda_max are discarded.
KrausChannel kraus_from_choi(const ChoiChannel& j, double tol = 1e-10, const Tolerances& psd = {});

/// Kraus route: sum_k K rho K^dag.
Matrix apply_channel(const KrausChannel& ch, const Matrix& rho);
/// Choi route: Tr_I[J (rho^t (x) I)].
Matrix apply_channel(const ChoiChannel& ch, const Matrix& rho);

/// Choi of `second` after `first`.
ChoiChannel compose_channels(const ChoiChannel& second, const ChoiChannel& first);
ChoiChannel compose_channels(const KrausChannel& second, const KrausChannel& first);

/// |U>><<U| with |U>> = sum_i |i> (x) U|i>.
ChoiChannel unitary_choi(const Matrix& u);
/// The vectorisation |U>>, indexed (i, o) -> U(o, i).
Vector double_ket(const Matrix& u);

Matrix haar_random_unitary(int d, std::mt19937_64& rng);
Matrix haar_random_unitary(int d, std::uint64_t seed);
/// Random CPTP map with the given Kraus rank, drawn from a Haar isometry.
KrausChannel random_cptp_channel(int d, int kraus_rank, std::mt19937_64& rng);

enum class ChannelKind { identity, depolarizing, replace_zero, fourier_unitary, pauli_unitary };

/// Standard channels; `pauli` selects I, X, Y, Z (0..3) for pauli_unitary, which requires d = 2.
KrausChannel standard_channel(ChannelKind kind, int d, int pauli = 0);

Matrix pauli_matrix(int index);
Matrix fourier_matrix(int d);

/// Swap operator F|a b> = |b a> on [(first, d), (second, d)].
Operator flip_operator(int d, const std::string& first = "I", const std::string& second = "O");

}  // namespace qswitch
