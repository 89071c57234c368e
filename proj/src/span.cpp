#include "qswitch/span.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace qswitch {

std::string to_string(Lemma l) {
    switch (l) {
        case Lemma::A1: return "A1";
        case Lemma::A2: return "A2";
        case Lemma::A3: return "A3";
        case Lemma::A4: return "A4";
        case Lemma::A5: return "A5";
    }
    return "?";
}

namespace {

Eigen::Index pair_index(int d, int a, int b) { return static_cast<Eigen::Index>(a) * d + b; }

cplx phase(double t) { return std::polar(1.0, t); }

bool distinct(const std::vector<int>& v) { return std::set<int>(v.begin(), v.end()).size() == v.size(); }

// sum_{l not in excluded} |ll>
void add_diagonal_complement(Vector& v, int d, const std::vector<int>& excluded, cplx c) {
    for (int l = 0; l < d; ++l)
        if (std::find(excluded.begin(), excluded.end(), l) == excluded.end()) v(pair_index(d, l, l)) += c;
}

Matrix ket_bra(int d, int a, int b, int ap, int bp) {
    Matrix m = Matrix::Zero(d * d, d * d);
    m(pair_index(d, a, b), pair_index(d, ap, bp)) = 1.0;
    return m;
}

}  // namespace

SpanGenerator::SpanGenerator(Lemma lemma, int variant, std::vector<int> indices, int d)
    : lemma_(lemma), variant_(variant), indices_(std::move(indices)), d_(d) {
    if (d_ < 1) throw SpanError("dimension must be positive");
    for (int v : indices_)
        if (v < 0 || v >= d_) throw SpanError("generator index out of range");
    auto need = [&](std::size_t n, int lo, int hi) {
        if (indices_.size() != n) throw SpanError(to_string(lemma_) + ": wrong number of indices");
        if (variant_ < lo || variant_ > hi) throw SpanError(to_string(lemma_) + ": invalid variant");
    };
    switch (lemma_) {
        case Lemma::A1: need(2, 0, 1); break;
        case Lemma::A2: need(4, 0, 0); break;
        case Lemma::A3: need(3, 1, 4); break;
        case Lemma::A4: need(1, 0, 0); break;
        case Lemma::A5: need(2, 1, 2); break;
    }
    if (lemma_ != Lemma::A4 && !distinct(indices_))
        throw SpanError(to_string(lemma_) + ": indices must be pairwise distinct");
}

int SpanGenerator::phase_count() const {
    switch (lemma_) {
        case Lemma::A4: return d_;
        case Lemma::A5: return 3;
        default: return 2;
    }
}

// The integrand weight * |psi><psi| is a trigonometric polynomial whose
// degree in each phase is at most 2 (A1-A3), 3 (A5) or 1 (A4); a grid of
// N points averages every nonzero frequency below N to zero.
int SpanGenerator::min_grid() const {
    switch (lemma_) {
        case Lemma::A4: return 2;
        case Lemma::A5: return 4;
        default: return 3;
    }
}

Vector SpanGenerator::state(const std::vector<double>& ph) const {
    if (static_cast<int>(ph.size()) != phase_count()) throw SpanError("wrong number of phases");
    const int d = d_;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d) * d);
    const auto& x = indices_;
    const double r = 1.0 / std::sqrt(2.0);
    switch (lemma_) {
        case Lemma::A1: {
            const int i = x[0], j = x[1];
            const cplx t = phase(ph[0]), f = phase(ph[1]);
            if (variant_ == 0) {
                v(pair_index(d, i, i)) += 1.0;
                v(pair_index(d, j, j)) += t;
            } else {
                v(pair_index(d, i, j)) += 1.0;
                v(pair_index(d, j, i)) += t;
            }
            add_diagonal_complement(v, d, {i, j}, f);
            break;
        }
        case Lemma::A2: {
            const int i = x[0], j = x[1], ip = x[2], jp = x[3];
            const cplx t = phase(ph[0]), f = phase(ph[1]);
            v(pair_index(d, i, j)) += 1.0;
            v(pair_index(d, ip, jp)) += t;
            v(pair_index(d, j, i)) += f;
            v(pair_index(d, jp, ip)) += f;
            add_diagonal_complement(v, d, x, f);
            break;
        }
        case Lemma::A3: {
            const int i = x[0], j = x[1], k = x[2];
            const cplx t = phase(ph[0]), f = phase(ph[1]);
            switch (variant_) {
                case 1:
                    v(pair_index(d, i, i)) += 1.0;
                    v(pair_index(d, j, k)) += t;
                    v(pair_index(d, k, j)) += f;
                    break;
                case 2:
                    v(pair_index(d, i, j)) += 1.0;
                    v(pair_index(d, j, k)) += t;
                    v(pair_index(d, k, i)) += f;
                    break;
                case 3:
                    // |i>(|j> + t|k>)/sqrt2 + f [ |j>(|j> - t|k>)/sqrt2 + |ki> ]
                    v(pair_index(d, i, j)) += r;
                    v(pair_index(d, i, k)) += r * t;
                    v(pair_index(d, j, j)) += r * f;
                    v(pair_index(d, j, k)) -= r * f * t;
                    v(pair_index(d, k, i)) += f;
                    break;
                default:
                    // (|i> + t|k>)|j>/sqrt2 + f [ (|i> - t|k>)|i>/sqrt2 + |jk> ]
                    v(pair_index(d, i, j)) += r;
                    v(pair_index(d, k, j)) += r * t;
                    v(pair_index(d, i, i)) += r * f;
                    v(pair_index(d, k, i)) -= r * f * t;
                    v(pair_index(d, j, k)) += f;
                    break;
            }
            add_diagonal_complement(v, d, {i, j, k}, f);
            break;
        }
        case Lemma::A4: {
            const int k = x[0];
            for (int i = 0; i < d; ++i) v(pair_index(d, i, (i + k) % d)) += phase(ph[i]);
            break;
        }
        case Lemma::A5: {
            const int i = x[0], j = x[1];
            const cplx t1 = phase(ph[0]), t2 = phase(ph[1]), f = phase(ph[2]);
            Vector plus = Vector::Zero(d), minus = Vector::Zero(d);
            plus(i) = r;
            plus(j) = r * t2;
            minus(i) = r;
            minus(j) = -r * t2;
            const Vector& second_a = variant_ == 1 ? plus : minus;
            const Vector& second_b = variant_ == 1 ? minus : plus;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    v(pair_index(d, a, b)) += plus(a) * second_a(b) + t1 * minus(a) * second_b(b);
            add_diagonal_complement(v, d, {i, j}, f);
            break;
        }
    }
    return v;
}

cplx SpanGenerator::weight(const std::vector<double>& ph) const {
    if (static_cast<int>(ph.size()) != phase_count()) throw SpanError("wrong number of phases");
    switch (lemma_) {
        case Lemma::A4: return 1.0;
        case Lemma::A5: return phase(ph[0] - ph[1]);
        default: return phase(ph[0]);
    }
}

Matrix SpanGenerator::target() const {
    const int d = d_;
    const auto& x = indices_;
    switch (lemma_) {
        case Lemma::A1:
            return variant_ == 0 ? ket_bra(d, x[0], x[0], x[1], x[1]) : ket_bra(d, x[0], x[1], x[1], x[0]);
        case Lemma::A2:
            return ket_bra(d, x[0], x[1], x[2], x[3]);
        case Lemma::A3: {
            const int i = x[0], j = x[1], k = x[2];
            switch (variant_) {
                case 1: return ket_bra(d, i, i, j, k);
                case 2: return ket_bra(d, i, j, j, k);
                case 3: {
                    // the phase-f tail |ki> + sum_l |ll> pairs with the -t |jk> branch
                    Matrix m = ket_bra(d, i, j, i, k) - ket_bra(d, j, j, j, k) - std::sqrt(2.0) * ket_bra(d, k, i, j, k);
                    for (int l = 0; l < d; ++l)
                        if (l != i && l != j && l != k) m -= std::sqrt(2.0) * ket_bra(d, l, l, j, k);
                    return m;
                }
                default: {
                    Matrix m = ket_bra(d, i, j, k, j) - ket_bra(d, i, i, k, i) - std::sqrt(2.0) * ket_bra(d, j, k, k, i);
                    for (int l = 0; l < d; ++l)
                        if (l != i && l != j && l != k) m -= std::sqrt(2.0) * ket_bra(d, l, l, k, i);
                    return m;
                }
            }
        }
        case Lemma::A4: {
            Matrix m = Matrix::Zero(d * d, d * d);
            for (int i = 0; i < d; ++i) m(pair_index(d, i, (i + x[0]) % d), pair_index(d, i, (i + x[0]) % d)) = 1.0;
            return m;
        }
        case Lemma::A5: {
            const int i = x[0], j = x[1];
            const double s = variant_ == 1 ? 1.0 : -1.0;
            return s * ket_bra(d, i, j, i, i) + ket_bra(d, j, i, i, i) - ket_bra(d, j, j, i, j) -
                   s * ket_bra(d, j, j, j, i);
        }
    }
    return {};
}

std::string SpanGenerator::describe() const {
    std::string s = to_string(lemma_);
    if (lemma_ == Lemma::A1 || lemma_ == Lemma::A3 || lemma_ == Lemma::A5) s += "." + std::to_string(variant_);
    s += " (";
    for (std::size_t n = 0; n < indices_.size(); ++n) s += (n ? "," : "") + std::to_string(indices_[n]);
    return s + ")";
}

SpanGenerator build_span_generator(Lemma lemma, int variant, std::vector<int> indices, int d) {
    return SpanGenerator(lemma, variant, std::move(indices), d);
}

std::vector<SpanGenerator> all_span_generators(int d) {
    std::vector<SpanGenerator> out;
    for (int v = 0; v <= 1; ++v)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j) out.emplace_back(Lemma::A1, v, std::vector<int>{i, j}, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    if (distinct({i, j, a, b})) out.emplace_back(Lemma::A2, 0, std::vector<int>{i, j, a, b}, d);
    for (int v = 1; v <= 4; ++v)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    if (distinct({i, j, k})) out.emplace_back(Lemma::A3, v, std::vector<int>{i, j, k}, d);
    for (int k = 0; k < d; ++k) out.emplace_back(Lemma::A4, 0, std::vector<int>{k}, d);
    for (int v = 1; v <= 2; ++v)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j) out.emplace_back(Lemma::A5, v, std::vector<int>{i, j}, d);
    return out;
}

double scaled_unitary_defect(const Vector& psi, int d) {
    Matrix m(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) m(a, b) = psi(pair_index(d, a, b));
    const Matrix g = m * m.adjoint();
    const double c = g.trace().real() / d;
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    return (g - c * Matrix::Identity(d, d)).norm() / c;
}

Matrix phase_average(const SpanGenerator& gen, int grid, double& worst_unitary_defect) {
    if (grid < gen.min_grid())
        throw SpanError(gen.describe() + ": grid " + std::to_string(grid) + " is below the exactness threshold " +
                        std::to_string(gen.min_grid()));
    const int p = gen.phase_count();
    const int d = gen.d();
    std::vector<int> digit(p, 0);
    std::vector<double> ph(p, 0.0);
    Matrix sum = Matrix::Zero(d * d, d * d);
    long long points = 0;
    worst_unitary_defect = 0.0;
    while (true) {
        for (int n = 0; n < p; ++n) ph[n] = 2.0 * std::numbers::pi * digit[n] / grid;
        const Vector psi = gen.state(ph);
        worst_unitary_defect = std::max(worst_unitary_defect, scaled_unitary_defect(psi, d));
        sum.noalias() += gen.weight(ph) * (psi * psi.adjoint());
        ++points;
        int n = 0;
        while (n < p && ++digit[n] == grid) digit[n++] = 0;
        if (n == p) break;
    }
    return sum / static_cast<double>(points);
}

Matrix phase_average(const SpanGenerator& gen, int grid) {
    double ignored = 0.0;
    return phase_average(gen, grid, ignored);
}

double scale_normalised_residual(const Matrix& avg, const Matrix& target) {
    const double tt = target.squaredNorm();
    if (tt == 0.0) return avg.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    const cplx s = (target.adjoint() * avg).trace() / tt;
    if (s.real() <= 0.0 || std::abs(s.imag()) > 1e-12 * std::abs(s))
        return std::numeric_limits<double>::infinity();
    return (avg / s.real() - target).norm() / std::sqrt(tt);
}

namespace {

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix haar_choi_columns(int d, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto n = static_cast<Eigen::Index>(d) * d;
    Matrix cols(n * n, samples);
    for (int s = 0; s < samples; ++s) cols.col(s) = vec(unitary_choi(haar_random_unitary(d, rng)).matrix());
    return cols;
}

}  // namespace

int estimate_span_dimension(int d, int samples, std::uint64_t seed) {
    if (d < 1 || samples < 1) throw SpanError("invalid span-dimension request");
    return static_cast<int>(column_rank(haar_choi_columns(d, samples, seed), 1e-10));
}

SpanBasis::SpanBasis(int d, std::uint64_t seed, int samples, double rank_tol) : d_(d) {
    if (d < 1) throw SpanError("dimension must be positive");
    if (samples <= 0) samples = 4 * (d * d - 1) * (d * d - 1) + 4;
    const Matrix cols = haar_choi_columns(d, samples, seed);
    Eigen::BDCSVD<Matrix> svd(cols, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > rank_tol * sv(0)) ++r;
    basis_ = svd.matrixU().leftCols(r);
}

double SpanBasis::residual(const Matrix& op) const {
    const auto n = static_cast<Eigen::Index>(d_) * d_;
    if (op.rows() != n || op.cols() != n) throw SpanError("operator must act on I (x) O");
    const Vector x = vec(op);
    const double norm = x.norm();
    if (norm == 0.0) return 0.0;
    const Vector r = x - basis_ * (basis_.adjoint() * x);
    return r.norm() / norm;
}

double membership_residual(const Matrix& op, int d, int samples, std::uint64_t seed) {
    return SpanBasis(d, seed, samples).residual(op);
}

double membership_residual(const Operator& op, int d, int samples, std::uint64_t seed) {
    return membership_residual(op.matrix(), d, samples, seed);
}

long long span_summary_count(int d) {
    const long long n = d;
    return n * (n * n * n - 3 * n + 3);
}

std::vector<Matrix> span_summary_list(int d, bool literal) {
    std::vector<Matrix> out;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) {
                out.push_back(ket_bra(d, i, i, j, j));
                out.push_back(ket_bra(d, i, j, j, i));
            }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    if (distinct({i, j, a, b})) {
                        out.push_back(ket_bra(d, i, j, a, b));
                        continue;
                    }
                    // exactly one coincident pair, the other two indices distinct from it and each other
                    if (std::set<int>{i, j, a, b}.size() != 3) continue;
                    if (!literal && i == a) {
                        out.push_back(ket_bra(d, i, j, i, b) - ket_bra(d, j, j, j, b));
                    } else if (!literal && j == b) {
                        out.push_back(ket_bra(d, i, j, a, j) - ket_bra(d, i, i, a, i));
                    } else {
                        out.push_back(ket_bra(d, i, j, a, b));
                    }
                }
    for (int k = 0; k < d; ++k) out.push_back(SpanGenerator(Lemma::A4, 0, {k}, d).target());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) {
                out.push_back(ket_bra(d, i, j, i, i) - ket_bra(d, j, j, j, i));
                out.push_back(ket_bra(d, j, i, i, i) - ket_bra(d, j, j, i, j));
            }
    return out;
}

namespace {

Matrix stack(const std::vector<Matrix>& items) {
    if (items.empty()) return {};
    Matrix cols(items.front().size(), static_cast<Eigen::Index>(items.size()));
    for (std::size_t n = 0; n < items.size(); ++n) cols.col(static_cast<Eigen::Index>(n)) = vec(items[n]);
    return cols;
}

}  // namespace

CertificateReport verify_span_lemmas(int d, std::uint64_t seed) {
    Stopwatch clock;
    CertificateReport report("span-lemmas d=" + std::to_string(d));
    if (d < 2) throw SpanError("span lemmas need d >= 2");

    struct FamilyStats {
        int count = 0;
        double residual = 0.0;
        double doubling = 0.0;
        double unitary = 0.0;
    };
    std::map<std::string, FamilyStats> stats;
    for (const auto& gen : all_span_generators(d)) {
        double defect = 0.0, defect2 = 0.0;
        const Matrix avg = phase_average(gen, gen.default_grid(), defect);
        const Matrix avg2 = phase_average(gen, 2 * gen.default_grid(), defect2);
        auto& s = stats[to_string(gen.lemma())];
        ++s.count;
        s.residual = std::max(s.residual, scale_normalised_residual(avg, gen.target()));
        s.doubling = std::max(s.doubling, (avg2 - avg).norm());
        s.unitary = std::max({s.unitary, defect, defect2});
    }
    for (const char* name : {"A1", "A2", "A3", "A4", "A5"}) {
        const auto it = stats.find(name);
        if (it == stats.end()) {
            report.note(std::string(name) + ": no index tuples at d=" + std::to_string(d));
            continue;
        }
        const auto& s = it->second;
        const std::string p = std::string(name) + " ";
        report.note(p + "generators: " + std::to_string(s.count));
        report.expect_at_most(p + "max scale-normalised residual", s.residual, 1e-10);
        report.expect_at_most(p + "max grid-doubling change", s.doubling, 1e-13);
        report.expect_at_most(p + "max scaled-unitary defect", s.unitary, 1e-10);
    }

    const int span_dim = estimate_span_dimension(d, 2 * ((d * d - 1) * (d * d - 1) + 1) + 10, seed);
    const long long expected_dim = static_cast<long long>(d * d - 1) * (d * d - 1) + 1;
    report.expect_equal("span dimension", span_dim, expected_dim);

    const auto literal = span_summary_list(d, true);
    const auto corrected = span_summary_list(d, false);
    report.expect_equal("summary list count", static_cast<long long>(literal.size()), span_summary_count(d));
    const auto literal_rank = static_cast<long long>(column_rank(stack(literal), 1e-10));
    const auto corrected_rank = static_cast<long long>(column_rank(stack(corrected), 1e-10));
    report.expect_at_most("summary list rank", static_cast<double>(literal_rank),
                          static_cast<double>(span_summary_count(d)));
    if (d == 2)
        report.expect_equal("corrected list rank equals span dimension", corrected_rank, expected_dim);
    else
        report.expect_at_most("corrected list rank below span dimension", static_cast<double>(corrected_rank),
                              static_cast<double>(expected_dim - 1));

    const SpanBasis basis(d, seed + 1);
    double worst_member = 0.0;
    for (const auto& m : corrected) worst_member = std::max(worst_member, basis.residual(m));
    report.expect_at_most("corrected list max membership residual", worst_member, 1e-9);
    long long outside = 0;
    for (const auto& m : literal)
        if (basis.residual(m) > 1e-6) ++outside;
    const long long n = d;
    report.expect_equal("literal single ket-bras outside the span", outside, 2 * n * (n - 1) * (n - 2));
    report.note("the single ket-bras |ij><ik| and |ij><kj| are not in span{J_U}; the A3 generators "
                "with the A3.2 ket-bras yield |ij><ik| - |jj><jk| and |ij><kj| - |ii><ki| instead");
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

std::string to_string(GroupId g) {
    switch (g) {
        case GroupId::G1: return "G1";
        case GroupId::G2: return "G2";
        case GroupId::G3: return "G3";
        case GroupId::G3a: return "G3a";
        case GroupId::G3b: return "G3b";
    }
    return "?";
}

long long group_size_formula(GroupId g, int d) {
    const long long n = d;
    switch (g) {
        case GroupId::G1: return n * (n - 1) * (n * n + n - 4);
        case GroupId::G2: return n;
        case GroupId::G3: return 2 * n * (n - 1);
        case GroupId::G3a:
        case GroupId::G3b: return n * (n - 1);
    }
    return 0;
}

namespace {

GroupElement make_element(GroupId g, std::vector<int> idx, std::vector<KetBraTerm> terms, int d) {
    Matrix m = Matrix::Zero(d * d, d * d);
    for (const auto& t : terms) m(pair_index(d, t.ket[0], t.ket[1]), pair_index(d, t.bra[0], t.bra[1])) += t.coeff;
    return GroupElement{g, std::move(idx), std::move(terms), Operator(channel_layout(d, d), std::move(m))};
}

}  // namespace

std::vector<GroupElement> build_group(GroupId g, int d) {
    if (d < 2) throw SpanError("groups need d >= 2");
    std::vector<GroupElement> out;
    switch (g) {
        case GroupId::G1:
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b < d; ++b) {
                            const bool diagonal = i == a && j == b;
                            const int equal_to_others = (i == j) + (i == a) + (i == b) + (j == a) + (j == b) + (a == b);
                            // exactly three equal indices give three coincident pairs
                            const bool three_equal = std::set<int>{i, j, a, b}.size() == 2 && equal_to_others == 3;
                            if (diagonal || three_equal) continue;
                            out.push_back(make_element(g, {i, j, a, b}, {{{i, j}, {a, b}, 1.0}}, d));
                        }
            break;
        case GroupId::G2:
            for (int m = 0; m < d; ++m) {
                std::vector<KetBraTerm> terms;
                for (int i = 0; i < d; ++i) terms.push_back({{i, (i + m) % d}, {i, (i + m) % d}, 1.0});
                out.push_back(make_element(g, {m}, std::move(terms), d));
            }
            break;
        case GroupId::G3a:
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    if (k != l) out.push_back(make_element(g, {k, l}, {{{k, l}, {k, k}, 1.0}, {{l, l}, {l, k}, -1.0}}, d));
            break;
        case GroupId::G3b:
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    if (k != l) out.push_back(make_element(g, {k, l}, {{{l, k}, {k, k}, 1.0}, {{l, l}, {k, l}, -1.0}}, d));
            break;
        case GroupId::G3: {
            out = build_group(GroupId::G3a, d);
            auto b = build_group(GroupId::G3b, d);
            for (auto& e : out) e.group = GroupId::G3;
            for (auto& e : b) {
                e.group = GroupId::G3;
                out.push_back(std::move(e));
            }
            break;
        }
    }
    return out;
}

}  // namespace qswitch
