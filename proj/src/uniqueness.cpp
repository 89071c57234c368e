#include "qswitch/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qswitch/probe.hpp"

namespace qswitch {

SpaceLayout one_slot_layout(int d) { return SpaceLayout({{"I", d}, {"O", d}, {"P", d}, {"F", d}}); }

OneSlotProcess::OneSlotProcess(int dim, Operator o) : d(dim), op(std::move(o)) {
    if (op.layout() != one_slot_layout(d))
        throw UniquenessError("one-slot process must use layout " + to_string(one_slot_layout(d)));
}

namespace {

void require_dim(int d) {
    if (d < 2) throw UniquenessError("dimension must be at least 2");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Exact integer when within 1e-9 of one, else unchanged.
double snap_integer(double v) {
    const double r = std::round(v);
    return std::abs(v - r) <= 1e-9 ? r : v;
}

// Entrywise one-norm after zeroing entries below 1e-12.
double rounded_one_norm(const Matrix& m) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const double a = std::abs(m(r, c));
            if (a >= 1e-12) s += a;
        }
    return s;
}

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

void require_unitary(const Matrix& u, int d, const char* what) {
    if (u.rows() != d || u.cols() != d)
        throw UniquenessError(std::string(what) + " must be " + std::to_string(d) + " x " + std::to_string(d));
    if ((u.adjoint() * u - Matrix::Identity(d, d)).norm() > 1e-10)
        throw UniquenessError(std::string(what) + " must be unitary");
}

}  // namespace

Matrix one_slot_action(const OneSlotProcess& c, const Matrix& j) {
    const auto n = static_cast<Eigen::Index>(c.d) * c.d;
    if (j.rows() != n || j.cols() != n) throw UniquenessError("slot operator must be d^2 x d^2");
    const Matrix& big = c.op.matrix();
    Matrix out = Matrix::Zero(n, n);
    // out[o,o'] = sum_{s,s'} C[(s,o),(s',o')] J[s,s']
    for (Eigen::Index s = 0; s < n; ++s)
        for (Eigen::Index sp = 0; sp < n; ++sp) {
            const cplx v = j(s, sp);
            if (v == cplx(0.0)) continue;
            out.noalias() += v * big.block(s * n, sp * n, n, n);
        }
    return out;
}

ChoiChannel apply_one_slot(const OneSlotProcess& c, const ChoiChannel& j) {
    if (j.dim_in() != c.d || j.dim_out() != c.d)
        throw UniquenessError("slot channel must act on dimension " + std::to_string(c.d));
    return ChoiChannel::from_matrix(c.d, c.d, one_slot_action(c, j.matrix()));
}

OneSlotProcess build_identity_process(int d) {
    require_dim(d);
    const auto layout = one_slot_layout(d);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(flat_index(layout, {i, j, i, j})) = 1.0;
    return OneSlotProcess(d, Operator::outer(layout, v, v));
}

CertificateReport certify_identity_uniqueness(const OneSlotProcess& c, double tol) {
    Stopwatch clock;
    const int d = c.d;
    const auto layout = one_slot_layout(d);
    const Matrix& m = c.op.matrix();
    auto at = [&](std::initializer_list<int> ket, std::initializer_list<int> bra) {
        return m(flat_index(layout, ket), flat_index(layout, bra));
    };
    CertificateReport report("identity-uniqueness d=" + std::to_string(d));

    double worst = 0.0;
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            cplx s = 0.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s += at({i, j, k, l}, {i, j, k, l});
            worst = std::max(worst, std::abs(s - 1.0));
        }
    report.expect_at_most("(i) max |sum_ij <ijkl|C|ijkl> - 1|", worst, tol);

    report.expect_near("(ii) Tr C", m.trace().real(), static_cast<double>(d) * d, tol);
    report.expect_at_most("(ii) |Im Tr C|", std::abs(m.trace().imag()), tol);

    worst = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            worst = std::max(worst, std::abs(at({i, j, i, j}, {j, i, j, i}) - 1.0));
            worst = std::max(worst, std::abs(at({i, i, i, i}, {j, j, j, j}) - 1.0));
        }
    report.expect_at_most("(iii) max |<ijij|C|jiji> - 1|, |<iiii|C|jjjj> - 1|", worst, tol);

    long long support = 0, off_pattern = 0;
    double unit_gap = 0.0;
    std::string tuples;
    for (std::size_t t = 0; t < layout.total_dim(); ++t) {
        const auto g = digits_of(layout, t);
        const bool pattern = g[0] == g[2] && g[1] == g[3];
        const cplx v = m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
        if (pattern) unit_gap = std::max(unit_gap, std::abs(v - 1.0));
        if (std::abs(v) <= tol) continue;
        ++support;
        if (!pattern) {
            ++off_pattern;
            continue;
        }
        if (!tuples.empty()) tuples += ' ';
        tuples += "(" + std::to_string(g[0]) + std::to_string(g[1]) + "," + std::to_string(g[2]) +
                  std::to_string(g[3]) + ")";
    }
    report.expect_equal("(iv) diagonal support size", support, static_cast<long long>(d) * d);
    report.expect_equal("(iv) support entries outside (ij,ij)", off_pattern, 0);
    report.expect_at_most("(iv) max |<ijij|C|ijij> - 1|", unit_gap, tol);
    report.note("diagonal support: " + tuples);

    const Matrix witness = unitary_choi(fourier_matrix(d)).matrix();
    const Matrix image = one_slot_action(c, witness);
    double min_abs = std::numeric_limits<double>::infinity();
    double chain = 0.0, action_gap = 0.0, forced = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    const Eigen::Index r = i * d + j, s = k * d + l;
                    const cplx w = witness(r, s);
                    min_abs = std::min(min_abs, std::abs(w));
                    chain = std::max(chain, std::abs(image(r, s) - at({i, j, i, j}, {k, l, k, l}) * w));
                    action_gap = std::max(action_gap, std::abs(image(r, s) - w));
                    forced = std::max(forced, std::abs(image(r, s) / w - 1.0));
                }
    report.expect_at_least("(v) Fourier witness min |entry|", min_abs, 1.0 / d, tol);
    report.expect_at_most("(v) max |<ij|C(J)|kl> - <ijij|C|klkl><ij|J|kl>|", chain, tol);
    report.expect_at_most("(v) max |<ij|C(J)|kl> - <ij|J|kl>|", action_gap, tol);
    report.expect_at_most("(v) max |forced <ijij|C|klkl> - 1|", forced, tol);
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport certify_identity_uniqueness(int d, double tol) {
    return certify_identity_uniqueness(build_identity_process(d), tol);
}

std::string to_string(DiagonalSetId s) { return "S" + std::to_string(static_cast<int>(s) + 1); }

DiagonalSet build_diagonal_set(DiagonalSetId id, int d) {
    require_dim(d);
    DiagonalSet set{id, {}};
    auto& m = set.members;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    switch (id) {
                        case DiagonalSetId::S1:
                            if (i == j || k == l) break;
                            if (j == k) m.push_back({i, j, k, l, i, l, 0, 0});
                            if (i == l) m.push_back({i, j, k, l, k, j, 1, 1});
                            break;
                        case DiagonalSetId::S2:
                            if (i != j && k == l && j == k) m.push_back({i, j, k, k, i, k, 0, 0});
                            break;
                        case DiagonalSetId::S3:
                            if (i != j && k == l && i == k) m.push_back({i, j, k, k, k, j, 1, 1});
                            break;
                        case DiagonalSetId::S4:
                            if (i == j && k != l && i == k) m.push_back({i, i, k, l, i, l, 0, 0});
                            break;
                        case DiagonalSetId::S5:
                            if (i == j && k != l && i == l) m.push_back({i, i, k, l, k, i, 1, 1});
                            break;
                        case DiagonalSetId::S6:
                            if (i == j && k == l && i == k) m.push_back({i, i, k, k, i, k, 0, 0});
                            break;
                        case DiagonalSetId::S7:
                            if (i == j && k == l && i == k) m.push_back({i, i, k, k, k, i, 1, 1});
                            break;
                    }
                }
    return set;
}

long long diagonal_set_size_formula(DiagonalSetId id, int d) {
    const long long n = d;
    switch (id) {
        case DiagonalSetId::S1: return 2 * n * (n - 1) * (n - 1);
        case DiagonalSetId::S2:
        case DiagonalSetId::S3:
        case DiagonalSetId::S4:
        case DiagonalSetId::S5: return n * (n - 1);
        case DiagonalSetId::S6:
        case DiagonalSetId::S7: return n;
    }
    return 0;
}

namespace {

constexpr std::array<DiagonalSetId, 7> kAllSets = {DiagonalSetId::S1, DiagonalSetId::S2, DiagonalSetId::S3,
                                                  DiagonalSetId::S4, DiagonalSetId::S5, DiagonalSetId::S6,
                                                  DiagonalSetId::S7};

using Tuple8 = std::array<int, 8>;

// Displayed W0 actions on four ket-bra patterns, written out term by term.
struct DisplayedAction {
    std::string name;
    std::array<int, 4> ket;
    std::array<int, 4> bra;
    // (PT, FT, control) terms of the output ket and bra
    std::vector<std::array<int, 3>> out_ket;
    std::vector<std::array<int, 3>> out_bra;
};

std::vector<DisplayedAction> displayed_actions(int d) {
    std::vector<DisplayedAction> out;
    auto delta = [](int a, int b) { return a == b; };
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    if (i == j || k == l) continue;
                    {
                        DisplayedAction a{"|ijkl><jilk|", {i, j, k, l}, {j, i, l, k}, {}, {}};
                        if (delta(j, k)) a.out_ket.push_back({i, l, 0});
                        if (delta(i, l)) a.out_ket.push_back({k, j, 1});
                        if (delta(i, l)) a.out_bra.push_back({j, k, 0});
                        if (delta(j, k)) a.out_bra.push_back({l, i, 1});
                        out.push_back(std::move(a));
                    }
                    {
                        DisplayedAction a{"|ijkk><jill|", {i, j, k, k}, {j, i, l, l}, {}, {}};
                        if (delta(j, k)) a.out_ket.push_back({i, k, 0});
                        if (delta(i, k)) a.out_ket.push_back({k, j, 1});
                        if (delta(i, l)) a.out_bra.push_back({j, l, 0});
                        if (delta(j, l)) a.out_bra.push_back({l, i, 1});
                        out.push_back(std::move(a));
                    }
                    {
                        DisplayedAction a{"|iikl><jjlk|", {i, i, k, l}, {j, j, l, k}, {}, {}};
                        if (delta(i, k)) a.out_ket.push_back({i, l, 0});
                        if (delta(i, l)) a.out_ket.push_back({k, i, 1});
                        if (delta(j, l)) a.out_bra.push_back({j, k, 0});
                        if (delta(j, k)) a.out_bra.push_back({l, j, 1});
                        out.push_back(std::move(a));
                    }
                    {
                        DisplayedAction a{"|iikk><jjll|", {i, i, k, k}, {j, j, l, l}, {}, {}};
                        if (delta(i, k)) a.out_ket.push_back({i, k, 0});
                        if (delta(i, k)) a.out_ket.push_back({k, i, 1});
                        if (delta(j, l)) a.out_bra.push_back({j, l, 0});
                        if (delta(j, l)) a.out_bra.push_back({l, j, 1});
                        out.push_back(std::move(a));
                    }
                }
    return out;
}

Matrix displayed_matrix(int d, const DisplayedAction& a) {
    const auto layout = switch_output_layout(d);
    Vector ket = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    Vector bra = ket;
    for (const auto& t : a.out_ket) ket(flat_index(layout, {t[0], t[1], t[2], t[2]})) += 1.0;
    for (const auto& t : a.out_bra) bra(flat_index(layout, {t[0], t[1], t[2], t[2]})) += 1.0;
    return ket * bra.adjoint();
}

Operator slot_ket_bra(int d, const std::array<int, 4>& ket, const std::array<int, 4>& bra) {
    const auto layout = slot_pair_layout(d);
    return Operator::ket_bra(layout, flat_index(layout, {ket[0], ket[1], ket[2], ket[3]}),
                             flat_index(layout, {bra[0], bra[1], bra[2], bra[3]}));
}

// Minor pairs (psi, psi') with <psi|W|psi'> forced to 1.
std::vector<std::pair<Tuple8, Tuple8>> minor_pairs(int d) {
    std::vector<std::pair<Tuple8, Tuple8>> out;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            if (i == k) continue;
            for (int l = 0; l < d; ++l)
                if (l != k) out.push_back({{i, k, k, l, i, l, 0, 0}, {k, i, l, k, l, i, 1, 1}});
            if (i < k) {
                out.push_back({{i, k, k, k, i, k, 0, 0}, {k, i, i, i, k, i, 0, 0}});
                out.push_back({{i, k, i, i, i, k, 1, 1}, {k, i, k, k, k, i, 1, 1}});
                out.push_back({{i, i, i, k, i, k, 0, 0}, {k, k, k, i, k, i, 0, 0}});
                out.push_back({{i, i, k, i, k, i, 1, 1}, {k, k, i, k, i, k, 1, 1}});
            }
        }
    return out;
}

}  // namespace

CertificateReport diagonal_certificate(const TwoSlotProcess& w, double tol) {
    Stopwatch clock;
    const int d = w.d;
    const auto layout = two_slot_layout(d);
    const Matrix& m = w.op.matrix();
    auto idx = [&](const Tuple8& t) {
        return static_cast<Eigen::Index>(flat_index(layout, std::span<const int>(t.data(), t.size())));
    };
    CertificateReport report("diagonal d=" + std::to_string(d));

    // (i) displayed actions against the closed form and against W itself
    double formula_gap = 0.0, process_gap = 0.0;
    const auto actions = displayed_actions(d);
    for (const auto& a : actions) {
        const Matrix want = displayed_matrix(d, a);
        formula_gap = std::max(formula_gap, (fast_w0_action(d, a.ket, a.bra).matrix() - want).cwiseAbs().maxCoeff());
        process_gap =
            std::max(process_gap, (two_slot_action(w, slot_ket_bra(d, a.ket, a.bra)).matrix() - want).cwiseAbs().maxCoeff());
    }
    report.expect_at_most("(i) displayed actions vs closed-form W0 action", formula_gap, 0.0);
    report.expect_at_most("(i) displayed actions vs process action", process_gap, tol);
    report.note(std::to_string(actions.size()) + " displayed ket-bra actions checked");

    // (ii), (iii) family values and counts
    std::vector<char> member(layout.total_dim(), 0);
    double family_gap = 0.0, family_sum = 0.0;
    long long total = 0;
    bool sizes_ok = true;
    std::string sizes;
    for (auto id : kAllSets) {
        const auto set = build_diagonal_set(id, d);
        if (static_cast<long long>(set.members.size()) != diagonal_set_size_formula(id, d)) sizes_ok = false;
        sizes += (sizes.empty() ? "" : " ") + to_string(id) + "=" + std::to_string(set.members.size());
        total += static_cast<long long>(set.members.size());
        for (const auto& t : set.members) {
            const auto r = idx(t);
            member[static_cast<std::size_t>(r)] = 1;
            family_gap = std::max(family_gap, std::abs(m(r, r) - 1.0));
            family_sum += m(r, r).real();
        }
    }
    report.expect_at_most("(ii) max |<psi|W|psi> - 1| over S1..S7", family_gap, tol);
    report.expect_true("(iii) set sizes match formulas", sizes_ok);
    report.expect_equal("(iii) |S1| + ... + |S7|", total, 2LL * d * d * d);
    const long long n = d;
    const auto sz = [&](DiagonalSetId id) { return diagonal_set_size_formula(id, d); };
    report.expect_equal("(iii) paired count S1", sz(DiagonalSetId::S1), 2 * n * (n - 1) * (n - 1));
    report.expect_equal("(iii) paired count S2+S3", sz(DiagonalSetId::S2) + sz(DiagonalSetId::S3), 2 * n * (n - 1));
    report.expect_equal("(iii) paired count S4+S5", sz(DiagonalSetId::S4) + sz(DiagonalSetId::S5), 2 * n * (n - 1));
    report.expect_equal("(iii) paired count S6+S7", sz(DiagonalSetId::S6) + sz(DiagonalSetId::S7), 2 * n);
    report.note("set sizes: " + sizes);

    long long support = 0, stray = 0;
    double stray_max = 0.0;
    for (std::size_t t = 0; t < layout.total_dim(); ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        const double a = std::abs(m(r, r));
        if (a > tol) ++support;
        if (!member[t]) {
            stray_max = std::max(stray_max, a);
            if (a > tol) ++stray;
        }
    }
    report.expect_equal("(iii) diagonal support size", support, 2LL * d * d * d);
    report.expect_equal("(iii) support entries outside S1..S7", stray, 0);
    report.expect_at_most("(iii) max |diagonal| outside S1..S7", stray_max, tol);
    report.expect_near("(iii) sum of diagonal over S1..S7", family_sum, 2.0 * d * d * d, tol);
    report.expect_near("(iii) Tr W", m.trace().real(), 2.0 * d * d * d, tol);

    // (iv) tightness of the PSD minors
    double off_gap = 0.0, minor_gap = 0.0;
    const auto pairs = minor_pairs(d);
    for (const auto& [a, b] : pairs) {
        const auto ra = idx(a), rb = idx(b);
        off_gap = std::max(off_gap, std::abs(m(ra, rb) - 1.0));
        minor_gap = std::max(minor_gap, std::abs(m(ra, ra) * m(rb, rb) - std::norm(m(ra, rb))));
    }
    double block_off = 0.0, block_eig = 0.0, block_prod = 0.0;
    for (int c = 0; c < 2; ++c) {
        Matrix block(d, d);
        cplx prod = 1.0;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                block(a, b) = m(idx({a, a, a, a, a, a, c, c}), idx({b, b, b, b, b, b, c, c}));
                if (a != b) block_off = std::max(block_off, std::abs(block(a, b) - 1.0));
            }
            prod *= block(a, a);
        }
        block_prod = std::max(block_prod, std::abs(prod - 1.0));
        const Matrix herm = (block + block.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
        block_eig = std::max(block_eig, std::abs(es.eigenvalues()(0)));
    }
    report.expect_at_most("(iv) max |<psi|W|psi'> - 1| over minor pairs", off_gap, tol);
    report.expect_at_most("(iv) max |W_aa W_bb - |W_ab|^2| over minor pairs", minor_gap, tol);
    report.expect_at_most("(iv) max |off-diagonal - 1| in S6, S7 blocks", block_off, tol);
    report.expect_at_most("(iv) max |product of diagonal - 1| in S6, S7 blocks", block_prod, tol);
    report.expect_at_most("(iv) max |min eigenvalue| of S6, S7 blocks", block_eig, 1e-9);
    report.note(std::to_string(pairs.size()) + " 2x2 minors checked");

    // (v) 4x4 example: diagonal grid with step 1/20 and trace 2
    const int steps = 40;
    long long feasible = 0;
    std::array<double, 4> found{-1, -1, -1, -1};
    for (int a = 0; a <= steps; ++a)
        for (int dd = 0; a + dd <= steps; ++dd)
            for (int e = 0; a + dd + e <= steps; ++e) {
                const int h = steps - a - dd - e;
                const double av = a / 20.0, hv = h / 20.0;
                // the {0, 3} principal minor has off-diagonal 1
                if (av * hv - 1.0 < -1e-12) continue;
                ++feasible;
                found = {av, dd / 20.0, e / 20.0, hv};
            }
    report.expect_equal("(v) grid points with a h >= 1", feasible, 1);
    const double forced_gap = std::abs(found[0] - 1.0) + std::abs(found[1]) + std::abs(found[2]) + std::abs(found[3] - 1.0);
    report.expect_at_most("(v) |(a,d,e,h) - (1,0,0,1)|_1", forced_gap, 0.0);
    Matrix example = Matrix::Zero(4, 4);
    example(0, 0) = found[0];
    example(1, 1) = found[1];
    example(2, 2) = found[2];
    example(3, 3) = found[3];
    example(0, 3) = example(3, 0) = 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(example, Eigen::EigenvaluesOnly);
    report.expect_at_least("(v) example min eigenvalue", es.eigenvalues()(0), 0.0, 1e-12);
    report.expect_near("(v) example trace", example.trace().real(), 2.0, 1e-12);

    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport diagonal_certificate(int d, double tol) { return diagonal_certificate(build_switch_choi(d), tol); }

CertificateReport group_count_certificate(int d) {
    Stopwatch clock;
    CertificateReport report("groups d=" + std::to_string(d));
    long long size[3];
    const GroupId ids[3] = {GroupId::G1, GroupId::G2, GroupId::G3};
    for (int g = 0; g < 3; ++g) {
        size[g] = static_cast<long long>(build_group(ids[g], d).size());
        report.expect_equal("|" + to_string(ids[g]) + "|", size[g], group_size_formula(ids[g], d));
    }
    const long long n = d;
    report.expect_equal("|G1| + d|G2| + 2|G3|", size[0] + n * size[1] + 2 * size[2], n * n * n * n);
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

std::array<long long, 6> group_sum_formulas(int d) {
    const long long n = d;
    return {2 * n * (n - 1) * (2 * n * n * n * n + 2 * n * n * n - 18 * n * n + 11 * n + 8),
            2 * n * (n - 1) * (2 * n * n - n - 4),
            2 * n * n * (n + 1),
            4 * n * (n - 1) * (4 * n * n - 5 * n - 2),
            4 * n * (n - 1) * (n + 2),
            16 * n * n * (n - 1)};
}

std::array<double, 6> GroupSums::six() const {
    return {ordered[0][0], ordered[0][1], ordered[1][1], ordered[0][2], ordered[1][2], ordered[2][2]};
}

double GroupSums::ordered_total() const {
    double s = 0.0;
    for (const auto& row : ordered)
        for (double v : row) s += v;
    return s;
}

double GroupSums::unordered_total() const {
    double s = 0.0;
    for (double v : six()) s += v;
    return s;
}

namespace {

struct SlotTerm {
    std::array<int, 4> ket;
    std::array<int, 4> bra;
    double coeff;
};

std::vector<SlotTerm> product_terms(const GroupElement& a, const GroupElement& b) {
    std::vector<SlotTerm> out;
    for (const auto& x : a.terms)
        for (const auto& y : b.terms)
            out.push_back({{x.ket[0], x.ket[1], y.ket[0], y.ket[1]},
                           {x.bra[0], x.bra[1], y.bra[0], y.bra[1]},
                           x.coeff * y.coeff});
    return out;
}

template <class Action>
GroupSums accumulate_group_sums(int d, Action&& action_norm) {
    const std::array<std::vector<GroupElement>, 3> groups = {build_group(GroupId::G1, d), build_group(GroupId::G2, d),
                                                             build_group(GroupId::G3, d)};
    GroupSums sums;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double s = 0.0;
            for (const auto& x : groups[a])
                for (const auto& y : groups[b]) s += action_norm(product_terms(x, y));
            sums.ordered[a][b] = snap_integer(s);
        }
    const auto g1 = build_group(GroupId::G1, d);
    for (int part = 0; part < 2; ++part) {
        double s = 0.0;
        for (const auto& x : g1)
            for (const auto& y : build_group(part == 0 ? GroupId::G3a : GroupId::G3b, d))
                s += action_norm(product_terms(x, y));
        (part == 0 ? sums.g1_g3a : sums.g1_g3b) = snap_integer(s);
    }
    return sums;
}

}  // namespace

GroupSums group_sums_fast(int d) {
    if (d < 2 || d > 4) throw UniquenessError("group sums are enumerated for 2 <= d <= 4");
    const Eigen::Index n_out = 4LL * d * d;
    return accumulate_group_sums(d, [&](const std::vector<SlotTerm>& terms) {
        // sparse accumulation of sum_t c_t ket(t) ket'(t)^dag
        std::map<std::pair<Eigen::Index, Eigen::Index>, cplx> acc;
        for (const auto& t : terms) {
            const Vector k = fast_w0_ket(d, t.ket), b = fast_w0_ket(d, t.bra);
            for (Eigen::Index r = 0; r < n_out; ++r) {
                if (k(r) == cplx(0.0)) continue;
                for (Eigen::Index c = 0; c < n_out; ++c)
                    if (b(c) != cplx(0.0)) acc[{r, c}] += t.coeff * k(r) * std::conj(b(c));
            }
        }
        double s = 0.0;
        for (const auto& [key, v] : acc)
            if (std::abs(v) >= 1e-12) s += std::abs(v);
        return s;
    });
}

GroupSums group_sums_dense(const TwoSlotProcess& w) {
    const int d = w.d;
    const auto layout = slot_pair_layout(d);
    const Eigen::Index n_out = 4LL * d * d;
    const Matrix& big = w.op.matrix();
    Matrix out(n_out, n_out);
    return accumulate_group_sums(d, [&](const std::vector<SlotTerm>& terms) {
        out.setZero();
        for (const auto& t : terms) {
            const auto s = static_cast<Eigen::Index>(flat_index(layout, {t.ket[0], t.ket[1], t.ket[2], t.ket[3]}));
            const auto sp = static_cast<Eigen::Index>(flat_index(layout, {t.bra[0], t.bra[1], t.bra[2], t.bra[3]}));
            out.noalias() += t.coeff * big.block(s * n_out, sp * n_out, n_out, n_out);
        }
        return rounded_one_norm(out);
    });
}

namespace {

CertificateReport offdiagonal_report(int d, const GroupSums& sums, const std::string& route) {
    CertificateReport report("offdiagonal d=" + std::to_string(d) + " (" + route + ")");
    const auto want = group_sum_formulas(d);
    const auto got = sums.six();
    const char* names[6] = {"S11", "S12", "S22", "S13", "S23", "S33"};
    for (int k = 0; k < 6; ++k)
        report.add({std::string(names[k]) + " = sum ||Tr_in W J^t||_1", got[k], static_cast<double>(want[k]), 0.0,
                    Relation::within});
    report.add({"S21 = S12", sums.ordered[1][0], sums.ordered[0][1], 0.0, Relation::within});
    report.add({"S31 = S13", sums.ordered[2][0], sums.ordered[0][2], 0.0, Relation::within});
    report.add({"S32 = S23", sums.ordered[2][1], sums.ordered[1][2], 0.0, Relation::within});
    report.add({"S(G1 x G3a) = S(G1 x G3b)", sums.g1_g3a, sums.g1_g3b, 0.0, Relation::within});
    report.add({"S13 = 2 S(G1 x G3a)", sums.ordered[0][2], 2.0 * sums.g1_g3a, 0.0, Relation::within});
    const double bound = 4.0 * d * d * d * d * d * d;
    report.add({"ordered total", sums.ordered_total(), bound, 0.0, Relation::within});
    report.note("unordered total " + fmt(sums.unordered_total()) + ", ordered total " + fmt(sums.ordered_total()) +
                ", (2d^3)^2 = " + fmt(bound));
    return report;
}

}  // namespace

CertificateReport offdiagonal_certificate(int d) {
    Stopwatch clock;
    auto report = offdiagonal_report(d, group_sums_fast(d), "closed-form action");
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport offdiagonal_certificate(const TwoSlotProcess& w) {
    Stopwatch clock;
    auto report = offdiagonal_report(w.d, group_sums_dense(w), "dense action");
    report.expect_near("||W||_1", snap_integer(rounded_one_norm(w.op.matrix())), 4.0 * std::pow(w.d, 6), 0.0);
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport certify_switch_uniqueness(const TwoSlotProcess& w, const SwitchCertificateOptions& opt) {
    Stopwatch clock;
    CertificateReport report("switch-uniqueness d=" + std::to_string(w.d));
    report.absorb(verify_unitary_action(w, opt.trials, opt.seed, opt.tol));
    report.absorb(verify_span_lemmas(w.d, opt.seed));
    report.absorb(diagonal_certificate(w));
    report.absorb(offdiagonal_certificate(w));
    if (opt.include_probe && w.d == 2) {
        const auto sys = build_constraint_system(ProcessKind::switch_process, 2, opt.seed);
        ProbeOptions p;
        p.starts = opt.probe_starts;
        p.seed = opt.seed;
        report.absorb(alternating_projection_probe(sys, p));
    } else {
        report.note("probe skipped at d=" + std::to_string(w.d));
    }
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport certify_switch_uniqueness(int d, const SwitchCertificateOptions& opt) {
    return certify_switch_uniqueness(build_switch_choi(d), opt);
}

std::string to_string(DerivedKind k) {
    switch (k) {
        case DerivedKind::sandwich: return "sandwich";
        case DerivedKind::transpose: return "transpose";
        case DerivedKind::conjugate_qubit: return "conjugate_qubit";
    }
    return "?";
}

namespace {

DerivedSpec resolved(const DerivedSpec& spec) {
    if (spec.kind != DerivedKind::conjugate_qubit) return spec;
    const Matrix y = pauli_matrix(2);
    return DerivedSpec::sandwich(y, y);
}

void validate(const DerivedSpec& spec, int d) {
    require_dim(d);
    if (spec.kind == DerivedKind::conjugate_qubit && d != 2) throw UniquenessError("conjugate_qubit requires d = 2");
    if (spec.kind == DerivedKind::sandwich) {
        require_unitary(spec.a, d, "A");
        require_unitary(spec.b, d, "B");
    }
}

Matrix sandwich_factor(const Matrix& a, const Matrix& b, int d) {
    const Matrix id = Matrix::Identity(d, d);
    return kron(kron(kron(a, id), id), b);
}

}  // namespace

OneSlotProcess build_derived_one_slot(const DerivedSpec& spec, int d) {
    validate(spec, d);
    const auto c0 = build_identity_process(d);
    const auto r = resolved(spec);
    if (r.kind == DerivedKind::transpose) {
        const auto swapped = permute_systems(c0.op, {"O", "I", "P", "F"});
        return OneSlotProcess(d, swapped.relabeled(one_slot_layout(d)));
    }
    const Matrix s = sandwich_factor(r.a, r.b, d);
    return OneSlotProcess(d, Operator(one_slot_layout(d), s * c0.op.matrix() * s.adjoint()));
}

ChoiChannel derived_extension(const DerivedSpec& spec, const ChoiChannel& lambda) {
    const int d = lambda.dim_in();
    if (lambda.dim_out() != d) throw UniquenessError("extension needs a channel on a single dimension");
    validate(spec, d);
    const auto r = resolved(spec);
    if (r.kind == DerivedKind::transpose) {
        const auto swapped = permute_systems(lambda.op(), {"O", "I"});
        return ChoiChannel(swapped.relabeled(channel_layout(d, d)));
    }
    return compose_channels(unitary_choi(r.b), compose_channels(lambda, unitary_choi(r.a)));
}

CertificateReport verify_corollary(DerivedSpec spec, int d, int trials, std::uint64_t seed, double tol) {
    Stopwatch clock;
    std::mt19937_64 rng(seed);
    if (spec.kind == DerivedKind::sandwich && spec.a.size() == 0 && spec.b.size() == 0) {
        spec.a = haar_random_unitary(d, rng);
        spec.b = haar_random_unitary(d, rng);
    }
    const auto c = build_derived_one_slot(spec, d);
    const auto c0 = build_identity_process(d);
    CertificateReport report("corollary " + to_string(spec.kind) + " d=" + std::to_string(d));

    // change of variables back to C0
    Matrix undone;
    const auto r = resolved(spec);
    if (r.kind == DerivedKind::transpose) {
        undone = permute_systems(c.op, {"O", "I", "P", "F"}).matrix();
    } else {
        const Matrix s = sandwich_factor(r.a, r.b, d);
        undone = s.adjoint() * c.op.matrix() * s;
    }
    report.expect_at_most("||undo(C') - C0||_F", (undone - c0.op.matrix()).norm(), tol);

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Matrix u = haar_random_unitary(d, rng);
        Matrix target;
        switch (spec.kind) {
            case DerivedKind::sandwich: target = spec.b * u * spec.a; break;
            case DerivedKind::transpose: target = u.transpose(); break;
            case DerivedKind::conjugate_qubit: target = u.conjugate(); break;
        }
        worst = std::max(worst, choi_distance(apply_one_slot(c, unitary_choi(u)), unitary_choi(target)));
    }
    report.expect_at_most("max Haar Choi distance to target unitary", worst, tol);
    report.note(std::to_string(trials) + " Haar unitaries, seed " + std::to_string(seed));

    const auto lambda = choi_from_kraus(standard_channel(ChannelKind::replace_zero, d));
    const auto got = apply_one_slot(c, lambda);
    report.expect_at_most("replace_zero: distance to claimed extension", choi_distance(got, derived_extension(spec, lambda)),
                          tol);
    report.expect_true("replace_zero output is CP", got.is_cp());
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

Matrix cp_factor(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw UniquenessError("p must lie in [0, 1]");
    Matrix m(4, 4);
    m << 1, p, p, 1, p, 1, 1, p, p, 1, 1, p, 1, p, p, 1;
    return m;
}

OneSlotProcess build_cp_family(double p) {
    const Matrix m = cp_factor(p);
    const Vector phi = double_ket(Matrix::Identity(2, 2)) / std::sqrt(2.0);
    return OneSlotProcess(2, Operator(one_slot_layout(2), kron(m, phi * phi.adjoint())));
}

CertificateReport cp_family_certificate(int grid_points, int trials, std::uint64_t seed, double tol) {
    Stopwatch clock;
    if (grid_points < 2) throw UniquenessError("grid needs at least two points");
    CertificateReport report("cp-family");
    std::mt19937_64 rng(seed);
    std::vector<Matrix> us;
    for (int t = 0; t < trials; ++t) us.push_back(haar_random_unitary(2, rng));
    const Matrix ji = unitary_choi(Matrix::Identity(2, 2)).matrix();

    double min_eig = std::numeric_limits<double>::infinity();
    double worst_prop = 0.0, c_lo = std::numeric_limits<double>::infinity(), c_hi = -c_lo;
    for (int g = 0; g < grid_points; ++g) {
        const double p = static_cast<double>(g) / (grid_points - 1);
        const auto c = build_cp_family(p);
        min_eig = std::min(min_eig, min_eigenvalue(c.op));
        for (const auto& u : us) {
            const Matrix out = one_slot_action(c, unitary_choi(u).matrix());
            const cplx k = (ji.adjoint() * out).trace() / (ji.adjoint() * ji).trace();
            worst_prop = std::max(worst_prop, (out - k * ji).norm() / ji.norm());
            c_lo = std::min(c_lo, k.real());
            c_hi = std::max(c_hi, k.real());
        }
    }
    report.expect_at_least("min eigenvalue of C_p over grid", min_eig, 0.0, 1e-12);
    report.expect_at_most("max relative distance of output from C J_I", worst_prop, tol);
    report.note("proportionality constant ranges over [" + fmt(c_lo) + ", " + fmt(c_hi) + "] across unitaries");
    report.note(std::to_string(grid_points) + "-point grid, " + std::to_string(trials) + " Haar unitaries, seed " +
                std::to_string(seed));

    report.expect_equal("numerical_rank(C_1)", static_cast<long long>(numerical_rank(build_cp_family(1.0).op)), 1);
    const auto ev0 = hermitian_eigenvalues(Operator(channel_layout(2, 2), cp_factor(0.0)));
    RealVector want(4);
    want << 2, 2, 0, 0;
    report.expect_at_most("eigenvalues of M_0 vs (2,2,0,0)", (ev0 - want).cwiseAbs().maxCoeff(), tol);
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport fig1_demo(int trials, std::uint64_t seed, double tol) {
    Stopwatch clock;
    CertificateReport report("fig1");
    const int d = 2;
    const auto dep = choi_from_kraus(standard_channel(ChannelKind::depolarizing, d));
    const auto id = choi_from_kraus(standard_channel(ChannelKind::identity, d));
    auto circuit1 = [&](const ChoiChannel& l) { return compose_channels(dep, compose_channels(l, dep)); };
    auto circuit2 = [&](const ChoiChannel& l) { return compose_channels(id, compose_channels(l, dep)); };

    std::mt19937_64 rng(seed);
    double agree = 0.0, to_dep = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto ju = unitary_choi(haar_random_unitary(d, rng));
        const auto a = circuit1(ju), b = circuit2(ju);
        agree = std::max(agree, choi_distance(a, b));
        to_dep = std::max({to_dep, choi_distance(a, dep), choi_distance(b, dep)});
    }
    report.expect_at_most("max distance between circuits on unitaries", agree, tol);
    report.expect_at_most("max distance of unitary outputs from J_D", to_dep, tol);

    const auto lambda = choi_from_kraus(standard_channel(ChannelKind::replace_zero, d));
    const auto a = circuit1(lambda), b = circuit2(lambda);
    Matrix p0 = Matrix::Zero(d, d);
    p0(0, 0) = 1.0;
    const Matrix i2 = Matrix::Identity(d, d);
    const Matrix jd = kron(i2, i2 / 2.0), jl = kron(i2, p0);
    report.expect_at_most("circuit 1 on replace_zero vs I (x) I/2", (a.matrix() - jd).norm(), tol);
    report.expect_at_most("circuit 2 on replace_zero vs I (x) |0><0|", (b.matrix() - jl).norm(), tol);
    const double gap = choi_distance(a, b);
    report.expect_near("distance between replace_zero outputs", gap, (jd - jl).norm(), tol);
    report.note(std::to_string(trials) + " Haar unitaries, seed " + std::to_string(seed) +
                "; replace_zero outputs differ by " + fmt(gap));
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

}  // namespace qswitch
