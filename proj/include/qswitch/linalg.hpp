#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qswitch {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Raised for malformed layouts, label errors and dimension mismatches.
class LinalgError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical thresholds shared by the eigen-based predicates.
struct Tolerances {
    double herm = 1e-10;  // relative, ||A - A^dag||_F <= herm * ||A||_F
    double eig = 1e-10;   // relative reconstruction error
    double psd = 1e-9;    // absolute, min eigenvalue >= -psd
};

struct Subsystem {
    std::string label;
    int dim = 0;

    friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

/// Ordered list of labelled tensor factors. The first factor is the most
/// significant digit of the flattened index.
class SpaceLayout {
public:
    SpaceLayout() = default;
    SpaceLayout(std::vector<Subsystem> systems);
    SpaceLayout(std::initializer_list<Subsystem> systems)
        : SpaceLayout(std::vector<Subsystem>(systems)) {}

    const std::vector<Subsystem>& systems() const { return systems_; }
    std::size_t size() const { return systems_.size(); }
    std::size_t total_dim() const { return total_; }
    int dim(std::size_t pos) const { return systems_.at(pos).dim; }
    const std::string& label(std::size_t pos) const { return systems_.at(pos).label; }

    bool contains(const std::string& label) const;
    /// Position of `label`; throws LinalgError if absent.
    std::size_t index_of(const std::string& label) const;
    std::vector<std::string> labels() const;

    /// Stride of each factor in the flattened index.
    std::vector<std::size_t> strides() const;

    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

private:
    std::vector<Subsystem> systems_;
    std::size_t total_ = 0;
};

std::string to_string(const SpaceLayout& layout);

/// Dense square operator on a labelled tensor-product space.
class Operator {
public:
    Operator() = default;
    Operator(SpaceLayout layout, Matrix entries);

    static Operator zero(const SpaceLayout& layout);
    static Operator identity(const SpaceLayout& layout);
    /// |ket><bra| for flattened basis indices.
    static Operator ket_bra(const SpaceLayout& layout, std::size_t ket, std::size_t bra);
    /// |v><w|.
    static Operator outer(const SpaceLayout& layout, const Vector& v, const Vector& w);

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& matrix() const { return entries_; }
    std::size_t dim() const { return layout_.total_dim(); }
    cplx operator()(std::size_t row, std::size_t col) const { return entries_(row, col); }

    /// Same entries on a different layout with equal total dimension.
    Operator relabeled(SpaceLayout layout) const;

    Operator adjoint() const;
    cplx trace() const { return entries_.trace(); }
    double frobenius_norm() const { return entries_.norm(); }
    bool is_hermitian(double rel_tol = Tolerances{}.herm) const;

    Operator& operator+=(const Operator& other);
    Operator& operator-=(const Operator& other);
    Operator& operator*=(cplx s);
    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(cplx s, Operator a) { return a *= s; }
    friend Operator operator*(Operator a, cplx s) { return a *= s; }
    /// Matrix product; layouts must agree.
    friend Operator operator*(const Operator& a, const Operator& b);

private:
    SpaceLayout layout_;
    Matrix entries_;
};

/// Flattened index of a multi-index (one digit per factor).
std::size_t flat_index(const SpaceLayout& layout, std::span<const int> digits);
std::size_t flat_index(const SpaceLayout& layout, std::initializer_list<int> digits);
std::vector<int> digits_of(const SpaceLayout& layout, std::size_t index);

Operator tensor_product(const Operator& a, const Operator& b);
Operator partial_trace(const Operator& op, std::span<const std::string> labels);
Operator partial_trace(const Operator& op, std::initializer_list<std::string> labels);
Operator partial_transpose(const Operator& op, std::span<const std::string> labels);
Operator partial_transpose(const Operator& op, std::initializer_list<std::string> labels);
Operator permute_systems(const Operator& op, std::span<const std::string> new_order);
Operator permute_systems(const Operator& op, std::initializer_list<std::string> new_order);

struct EigenDecomposition {
    RealVector values;  // descending
    Matrix vectors;     // column k pairs with values(k)
};

/// Eigendecomposition of a Hermitian operator. Eigenvectors are phase-fixed so
/// that their first component above 1e-12 in magnitude is real and positive.
EigenDecomposition hermitian_eigen(const Operator& op, const Tolerances& tol = {});
/// Eigenvalues only, descending.
RealVector hermitian_eigenvalues(const Operator& op, const Tolerances& tol = {});

double entrywise_one_norm(const Operator& op);
double min_eigenvalue(const Operator& op, const Tolerances& tol = {});
bool is_psd(const Operator& op, const Tolerances& tol = {});
/// Count of eigenvalues with |lambda| > tol * max|lambda|.
std::size_t numerical_rank(const Operator& op, double tol = 1e-10, const Tolerances& herm = {});
/// Rank of the column span of an arbitrary matrix, via its Hermitian Gram matrix.
std::size_t column_rank(const Matrix& columns, double tol = 1e-10);

/// Projection onto the PSD cone by eigenvalue clipping.
Matrix psd_projection(const Matrix& hermitian);

}  // namespace qswitch
