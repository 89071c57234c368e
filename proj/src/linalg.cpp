#include "qswitch/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace qswitch {

SpaceLayout::SpaceLayout(std::vector<Subsystem> systems) : systems_(std::move(systems)) {
    if (systems_.empty()) throw LinalgError("empty layout");
    std::set<std::string> seen;
    total_ = 1;
    for (const auto& s : systems_) {
        if (s.dim <= 0) throw LinalgError("non-positive dimension for system '" + s.label + "'");
        if (!seen.insert(s.label).second) throw LinalgError("duplicate label '" + s.label + "'");
        total_ *= static_cast<std::size_t>(s.dim);
    }
}

bool SpaceLayout::contains(const std::string& label) const {
    return std::any_of(systems_.begin(), systems_.end(),
                       [&](const Subsystem& s) { return s.label == label; });
}

std::size_t SpaceLayout::index_of(const std::string& label) const {
    for (std::size_t k = 0; k < systems_.size(); ++k)
        if (systems_[k].label == label) return k;
    throw LinalgError("unknown label '" + label + "' in layout " + to_string(*this));
}

std::vector<std::string> SpaceLayout::labels() const {
    std::vector<std::string> out;
    out.reserve(systems_.size());
    for (const auto& s : systems_) out.push_back(s.label);
    return out;
}

std::vector<std::size_t> SpaceLayout::strides() const {
    std::vector<std::size_t> out(systems_.size());
    std::size_t stride = 1;
    for (std::size_t k = systems_.size(); k-- > 0;) {
        out[k] = stride;
        stride *= static_cast<std::size_t>(systems_[k].dim);
    }
    return out;
}

std::string to_string(const SpaceLayout& layout) {
    std::ostringstream os;
    os << '[';
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (k) os << ", ";
        os << layout.label(k) << ':' << layout.dim(k);
    }
    os << ']';
    return os.str();
}

Operator::Operator(SpaceLayout layout, Matrix entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(layout_.total_dim());
    if (entries_.rows() != n || entries_.cols() != n)
        throw LinalgError("operator entries do not match layout dimension " + std::to_string(n));
    if (!entries_.allFinite()) throw LinalgError("operator has non-finite entries");
}

Operator Operator::zero(const SpaceLayout& layout) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    return Operator(layout, Matrix::Zero(n, n));
}

Operator Operator::identity(const SpaceLayout& layout) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    return Operator(layout, Matrix::Identity(n, n));
}

Operator Operator::ket_bra(const SpaceLayout& layout, std::size_t ket, std::size_t bra) {
    Operator out = zero(layout);
    if (ket >= layout.total_dim() || bra >= layout.total_dim())
        throw LinalgError("basis index out of range");
    out.entries_(static_cast<Eigen::Index>(ket), static_cast<Eigen::Index>(bra)) = 1.0;
    return out;
}

Operator Operator::outer(const SpaceLayout& layout, const Vector& v, const Vector& w) {
    return Operator(layout, v * w.adjoint());
}

Operator Operator::relabeled(SpaceLayout layout) const {
    if (layout.total_dim() != layout_.total_dim())
        throw LinalgError("relabel changes total dimension");
    return Operator(std::move(layout), entries_);
}

Operator Operator::adjoint() const { return Operator(layout_, entries_.adjoint()); }

bool Operator::is_hermitian(double rel_tol) const {
    const double scale = std::max(entries_.norm(), 1.0);
    return (entries_ - entries_.adjoint()).norm() <= rel_tol * scale;
}

Operator& Operator::operator+=(const Operator& other) {
    if (!(layout_ == other.layout_)) throw LinalgError("layout mismatch in addition");
    entries_ += other.entries_;
    return *this;
}

Operator& Operator::operator-=(const Operator& other) {
    if (!(layout_ == other.layout_)) throw LinalgError("layout mismatch in subtraction");
    entries_ -= other.entries_;
    return *this;
}

Operator& Operator::operator*=(cplx s) {
    entries_ *= s;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
    if (!(a.layout_ == b.layout_)) throw LinalgError("layout mismatch in product");
    return Operator(a.layout_, a.entries_ * b.entries_);
}

std::size_t flat_index(const SpaceLayout& layout, std::span<const int> digits) {
    if (digits.size() != layout.size()) throw LinalgError("digit count does not match layout");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) {
        if (digits[k] < 0 || digits[k] >= layout.dim(k))
            throw LinalgError("digit out of range for system '" + layout.label(k) + "'");
        idx = idx * static_cast<std::size_t>(layout.dim(k)) + static_cast<std::size_t>(digits[k]);
    }
    return idx;
}

std::size_t flat_index(const SpaceLayout& layout, std::initializer_list<int> digits) {
    return flat_index(layout, std::span<const int>(digits.begin(), digits.size()));
}

std::vector<int> digits_of(const SpaceLayout& layout, std::size_t index) {
    std::vector<int> out(layout.size());
    for (std::size_t k = layout.size(); k-- > 0;) {
        const auto dim = static_cast<std::size_t>(layout.dim(k));
        out[k] = static_cast<int>(index % dim);
        index /= dim;
    }
    return out;
}

namespace {

std::vector<bool> select_mask(const SpaceLayout& layout, std::span<const std::string> labels) {
    std::vector<bool> mask(layout.size(), false);
    for (const auto& l : labels) mask[layout.index_of(l)] = true;
    return mask;
}

// Splits every flattened index into the contribution of masked and unmasked
// factors, both expressed in the original strides.
void split_offsets(const SpaceLayout& layout, const std::vector<bool>& mask,
                   std::vector<std::size_t>& masked, std::vector<std::size_t>& rest) {
    const std::size_t n = layout.total_dim();
    const auto strides = layout.strides();
    masked.assign(n, 0);
    rest.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        for (std::size_t k = 0; k < layout.size(); ++k) {
            const std::size_t digit = rem / strides[k];
            rem %= strides[k];
            (mask[k] ? masked[i] : rest[i]) += digit * strides[k];
        }
    }
}

// Offsets (in original strides) enumerating all digit combinations of the
// factors selected by `mask`, in row-major order of those factors.
std::vector<std::size_t> sub_offsets(const SpaceLayout& layout, const std::vector<bool>& mask) {
    const auto strides = layout.strides();
    std::vector<std::size_t> out{0};
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (!mask[k]) continue;
        std::vector<std::size_t> next;
        next.reserve(out.size() * static_cast<std::size_t>(layout.dim(k)));
        for (auto base : out)
            for (int digit = 0; digit < layout.dim(k); ++digit)
                next.push_back(base + static_cast<std::size_t>(digit) * strides[k]);
        out = std::move(next);
    }
    return out;
}

}  // namespace

Operator tensor_product(const Operator& a, const Operator& b) {
    std::vector<Subsystem> systems = a.layout().systems();
    for (const auto& s : b.layout().systems()) systems.push_back(s);
    SpaceLayout layout(std::move(systems));
    const auto na = static_cast<Eigen::Index>(a.dim());
    const auto nb = static_cast<Eigen::Index>(b.dim());
    Matrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    return Operator(std::move(layout), std::move(out));
}

Operator partial_trace(const Operator& op, std::span<const std::string> labels) {
    const auto& layout = op.layout();
    const auto mask = select_mask(layout, labels);
    std::vector<Subsystem> kept;
    for (std::size_t k = 0; k < layout.size(); ++k)
        if (!mask[k]) kept.push_back(layout.systems()[k]);
    if (kept.empty()) throw LinalgError("partial trace over every system");

    std::vector<bool> keep_mask(mask.size());
    for (std::size_t k = 0; k < mask.size(); ++k) keep_mask[k] = !mask[k];
    const auto keep_off = sub_offsets(layout, keep_mask);
    const auto trace_off = sub_offsets(layout, mask);

    const auto nk = static_cast<Eigen::Index>(keep_off.size());
    Matrix out = Matrix::Zero(nk, nk);
    const Matrix& m = op.matrix();
    for (Eigen::Index r = 0; r < nk; ++r)
        for (Eigen::Index c = 0; c < nk; ++c) {
            cplx acc = 0.0;
            for (auto t : trace_off)
                acc += m(static_cast<Eigen::Index>(keep_off[r] + t),
                         static_cast<Eigen::Index>(keep_off[c] + t));
            out(r, c) = acc;
        }
    return Operator(SpaceLayout(std::move(kept)), std::move(out));
}

Operator partial_trace(const Operator& op, std::initializer_list<std::string> labels) {
    return partial_trace(op, std::span<const std::string>(labels.begin(), labels.size()));
}

Operator partial_transpose(const Operator& op, std::span<const std::string> labels) {
    const auto& layout = op.layout();
    const auto mask = select_mask(layout, labels);
    std::vector<std::size_t> sel, rest;
    split_offsets(layout, mask, sel, rest);
    const auto n = static_cast<Eigen::Index>(op.dim());
    Matrix out(n, n);
    const Matrix& m = op.matrix();
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(static_cast<Eigen::Index>(rest[r] + sel[c]),
                static_cast<Eigen::Index>(rest[c] + sel[r])) = m(r, c);
    return Operator(layout, std::move(out));
}

Operator partial_transpose(const Operator& op, std::initializer_list<std::string> labels) {
    return partial_transpose(op, std::span<const std::string>(labels.begin(), labels.size()));
}

Operator permute_systems(const Operator& op, std::span<const std::string> new_order) {
    const auto& layout = op.layout();
    if (new_order.size() != layout.size()) throw LinalgError("new order is not a permutation");
    std::vector<std::size_t> perm;  // perm[k] = old position of new factor k
    std::vector<bool> used(layout.size(), false);
    for (const auto& l : new_order) {
        const auto pos = layout.index_of(l);
        if (used[pos]) throw LinalgError("new order repeats label '" + l + "'");
        used[pos] = true;
        perm.push_back(pos);
    }
    std::vector<Subsystem> systems;
    for (auto p : perm) systems.push_back(layout.systems()[p]);
    SpaceLayout target(std::move(systems));

    const auto old_strides = layout.strides();
    const auto new_strides = target.strides();
    const std::size_t n = layout.total_dim();
    std::vector<std::size_t> map(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i, idx = 0;
        std::vector<std::size_t> digit(layout.size());
        for (std::size_t k = 0; k < layout.size(); ++k) {
            digit[k] = rem / old_strides[k];
            rem %= old_strides[k];
        }
        for (std::size_t k = 0; k < perm.size(); ++k) idx += digit[perm[k]] * new_strides[k];
        map[i] = idx;
    }
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Matrix& m = op.matrix();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            out(static_cast<Eigen::Index>(map[r]), static_cast<Eigen::Index>(map[c])) =
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return Operator(std::move(target), std::move(out));
}

Operator permute_systems(const Operator& op, std::initializer_list<std::string> new_order) {
    return permute_systems(op, std::span<const std::string>(new_order.begin(), new_order.size()));
}

namespace {

void require_hermitian(const Operator& op, const Tolerances& tol) {
    if (!op.is_hermitian(tol.herm)) throw LinalgError("operator is not Hermitian within tolerance");
}

}  // namespace

EigenDecomposition hermitian_eigen(const Operator& op, const Tolerances& tol) {
    require_hermitian(op, tol);
    const Matrix sym = 0.5 * (op.matrix() + op.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    const auto n = sym.rows();
    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    // Eigen returns ascending order; stable reversal keeps ties deterministic.
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = solver.eigenvalues()(n - 1 - k);
        Vector v = solver.eigenvectors().col(n - 1 - k);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v(i)) > 1e-12) {
                v *= std::conj(v(i)) / std::abs(v(i));
                break;
            }
        }
        out.vectors.col(k) = v;
    }
    return out;
}

RealVector hermitian_eigenvalues(const Operator& op, const Tolerances& tol) {
    require_hermitian(op, tol);
    const Matrix sym = 0.5 * (op.matrix() + op.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().reverse();
}

double entrywise_one_norm(const Operator& op) { return op.matrix().cwiseAbs().sum(); }

double min_eigenvalue(const Operator& op, const Tolerances& tol) {
    const auto values = hermitian_eigenvalues(op, tol);
    return values(values.size() - 1);
}

bool is_psd(const Operator& op, const Tolerances& tol) { return min_eigenvalue(op, tol) >= -tol.psd; }

std::size_t numerical_rank(const Operator& op, double tol, const Tolerances& herm) {
    const auto values = hermitian_eigenvalues(op, herm);
    const double largest = values.cwiseAbs().maxCoeff();
    if (largest == 0.0) return 0;
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < values.size(); ++k)
        if (std::abs(values(k)) > tol * largest) ++rank;
    return rank;
}

std::size_t column_rank(const Matrix& columns, double tol) {
    if (columns.cols() == 0) return 0;
    const Matrix gram = columns.adjoint() * columns;
    SpaceLayout layout({{"g", static_cast<int>(gram.rows())}});
    return numerical_rank(Operator(layout, 0.5 * (gram + gram.adjoint())), tol);
}

Matrix psd_projection(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (hermitian + hermitian.adjoint()));
    const RealVector clipped = solver.eigenvalues().cwiseMax(0.0);
    return solver.eigenvectors() * clipped.cast<cplx>().asDiagonal() *
           solver.eigenvectors().adjoint();
}

}  // namespace qswitch
