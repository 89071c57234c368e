#include "qswitch/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qswitch {

std::string to_string(ProcessKind k) {
    switch (k) {
        case ProcessKind::identity: return "identity";
        case ProcessKind::switch_process: return "switch";
        case ProcessKind::derived: return "derived";
        case ProcessKind::cp_family: return "cp_family";
    }
    return "?";
}

namespace {

// Basis columns reshaped to d^2 x d^2 operators; the columns are column-major vecs.
std::vector<Matrix> span_family(int d, std::uint64_t seed) {
    const SpanBasis basis(d, seed);
    const auto n = static_cast<Eigen::Index>(d) * d;
    std::vector<Matrix> out;
    for (Eigen::Index m = 0; m < basis.basis().cols(); ++m)
        out.push_back(Eigen::Map<const Matrix>(basis.basis().col(m).data(), n, n));
    return out;
}

// Z[(o,o'),(a,a')] = X[(a,o),(a',o')].
Matrix to_constraint_form(const Matrix& x, Eigen::Index n_slot, Eigen::Index n_out) {
    Matrix z(n_out * n_out, n_slot * n_slot);
    for (Eigen::Index a = 0; a < n_slot; ++a)
        for (Eigen::Index ap = 0; ap < n_slot; ++ap)
            for (Eigen::Index o = 0; o < n_out; ++o)
                for (Eigen::Index op = 0; op < n_out; ++op)
                    z(o * n_out + op, a * n_slot + ap) = x(a * n_out + o, ap * n_out + op);
    return z;
}

Matrix from_constraint_form(const Matrix& z, Eigen::Index n_slot, Eigen::Index n_out) {
    Matrix x(n_slot * n_out, n_slot * n_out);
    for (Eigen::Index a = 0; a < n_slot; ++a)
        for (Eigen::Index ap = 0; ap < n_slot; ++ap)
            for (Eigen::Index o = 0; o < n_out; ++o)
                for (Eigen::Index op = 0; op < n_out; ++op)
                    x(a * n_out + o, ap * n_out + op) = z(o * n_out + op, a * n_slot + ap);
    return x;
}

Matrix flatten_columns(const std::vector<Matrix>& ops) {
    const Eigen::Index n = ops.front().rows();
    Matrix out(n * n, static_cast<Eigen::Index>(ops.size()));
    for (std::size_t m = 0; m < ops.size(); ++m)
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) out(r * n + c, static_cast<Eigen::Index>(m)) = ops[m](r, c);
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

ConstraintSystem build_constraint_system(ProcessKind kind, int d, std::uint64_t seed,
                                         const ProbeBuildOptions& options) {
    if (d < 2) throw ProbeError("dimension must be at least 2");
    ConstraintSystem sys;
    sys.kind = kind;
    sys.d = d;
    const auto base = span_family(d, seed);
    switch (kind) {
        case ProcessKind::identity:
        case ProcessKind::derived:
        case ProcessKind::cp_family: {
            if (kind == ProcessKind::cp_family && d != 2) throw ProbeError("cp_family system exists only at d = 2");
            sys.n_slot = sys.n_out = static_cast<Eigen::Index>(d) * d;
            sys.family = base;
            if (kind == ProcessKind::identity) sys.reference = build_identity_process(d).op.matrix();
            if (kind == ProcessKind::derived) sys.reference = build_derived_one_slot(options.derived, d).op.matrix();
            if (kind == ProcessKind::cp_family) sys.reference = build_cp_family(1.0).op.matrix();
            break;
        }
        case ProcessKind::switch_process: {
            if (d > 3 || (d == 3 && !options.allow_large_switch))
                throw ProbeError("switch system is limited to d = 2 unless allow_large_switch is set (d <= 3)");
            sys.n_slot = static_cast<Eigen::Index>(d) * d * d * d;
            sys.n_out = 4LL * d * d;
            for (const auto& a : base)
                for (const auto& b : base) sys.family.push_back(Eigen::kroneckerProduct(a, b).eval());
            sys.reference = build_switch_choi(d).op.matrix();
            break;
        }
    }
    sys.family_columns = flatten_columns(sys.family);
    sys.target_columns = constraint_image(sys, sys.reference);
    for (Eigen::Index m = 0; m < sys.target_columns.cols(); ++m)
        sys.targets.push_back(
            Eigen::Map<const Matrix>(sys.target_columns.col(m).data(), sys.n_out, sys.n_out).transpose());
    return sys;
}

Matrix constraint_image(const ConstraintSystem& sys, const Matrix& x) {
    if (x.rows() != sys.process_dim() || x.cols() != sys.process_dim())
        throw ProbeError("process has the wrong dimension for this constraint system");
    return to_constraint_form(x, sys.n_slot, sys.n_out) * sys.family_columns;
}

double constraint_residual(const ConstraintSystem& sys, const Matrix& x) {
    return (constraint_image(sys, x) - sys.target_columns).norm();
}

Matrix affine_projection(const ConstraintSystem& sys, const Matrix& x) {
    // family columns are orthonormal, so Z + (T - Z F) F^dag is the Frobenius projection
    Matrix z = to_constraint_form(x, sys.n_slot, sys.n_out);
    const Matrix gap = sys.target_columns - z * sys.family_columns;
    z.noalias() += gap * sys.family_columns.adjoint();
    const Matrix y = from_constraint_form(z, sys.n_slot, sys.n_out);
    // the affine set is closed under adjoint, so the Hermitian part stays inside
    return (y + y.adjoint()) / 2.0;
}

ProbeRun run_dykstra(const ConstraintSystem& sys, const Matrix& start, int max_iter, double step_tol) {
    const Eigen::Index n = sys.process_dim();
    Matrix x = start;
    Matrix p = Matrix::Zero(n, n), q = Matrix::Zero(n, n);
    ProbeRun run;
    for (int it = 1; it <= max_iter; ++it) {
        const Matrix y = psd_projection(x + p);
        p = x + p - y;
        const Matrix next = affine_projection(sys, y + q);
        q = y + q - next;
        const double step = (next - x).norm();
        x = next;
        run.iterations = it;
        if (step <= step_tol) {
            run.converged = true;
            break;
        }
    }
    run.point = x;
    run.distance = (x - sys.reference).norm();
    run.residual = constraint_residual(sys, x);
    run.min_eigenvalue = min_eigenvalue(Operator(SpaceLayout({{"X", static_cast<int>(n)}}), x));
    return run;
}

Matrix random_hermitian(Eigen::Index n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix h(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) h(r, c) = cplx(g(rng), g(rng));
    h = (h + h.adjoint()).eval();
    return h * (scale / h.norm());
}

CertificateReport alternating_projection_probe(const ConstraintSystem& sys, const ProbeOptions& opt) {
    Stopwatch clock;
    if (opt.starts < 1) throw ProbeError("probe needs at least one start");
    CertificateReport report("probe " + to_string(sys.kind) + " d=" + std::to_string(sys.d));
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0, worst_residual = 0.0, worst_eig = 0.0;
    int max_iters = 0, unconverged = 0;
    for (int s = 0; s < opt.starts; ++s) {
        const Matrix start =
            affine_projection(sys, sys.reference + random_hermitian(sys.process_dim(), opt.perturbation, rng));
        const auto run = run_dykstra(sys, start, opt.max_iter, opt.step_tol);
        worst = std::max(worst, run.distance);
        worst_residual = std::max(worst_residual, run.residual);
        worst_eig = std::max(worst_eig, -run.min_eigenvalue);
        max_iters = std::max(max_iters, run.iterations);
        if (!run.converged) ++unconverged;
    }
    report.expect_at_most("max distance to reference", worst, opt.tol);
    report.expect_at_most("max constraint residual", worst_residual, opt.feasibility_tol);
    report.expect_at_most("max negative eigenvalue", worst_eig, opt.feasibility_tol);
    report.note(std::to_string(opt.starts) + " starts, seed " + std::to_string(opt.seed) + ", family size " +
                std::to_string(sys.family.size()) + ", max iterations " + std::to_string(max_iters) +
                ", runs hitting max_iter " + std::to_string(unconverged));
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

CertificateReport nonuniqueness_probe(const ConstraintSystem& sys, const ProbeOptions& opt, double min_distance) {
    Stopwatch clock;
    if (sys.kind != ProcessKind::cp_family) throw ProbeError("non-uniqueness probe needs the cp_family system");
    CertificateReport report("probe cp_family non-uniqueness");
    std::mt19937_64 rng(opt.seed);
    std::vector<std::pair<std::string, Matrix>> starts;
    for (int s = 0; s < opt.starts; ++s)
        starts.emplace_back("C_1 + perturbation " + std::to_string(s),
                            sys.reference + random_hermitian(sys.process_dim(), opt.perturbation, rng));
    // remark family members as candidate starts
    for (double p : {0.0, 0.25, 0.5, 0.75})
        starts.emplace_back("C_p, p = " + fmt(p), build_cp_family(p).op.matrix());

    double best = 0.0, best_residual = std::numeric_limits<double>::infinity(), best_eig = 0.0;
    int feasible = 0;
    std::string best_label = "none";
    for (const auto& [label, s] : starts) {
        const auto run = run_dykstra(sys, affine_projection(sys, s), opt.max_iter, opt.step_tol);
        const bool ok = run.residual <= opt.feasibility_tol && run.min_eigenvalue >= -opt.feasibility_tol;
        if (!ok) continue;
        ++feasible;
        if (run.distance > best) {
            best = run.distance;
            best_residual = run.residual;
            best_eig = run.min_eigenvalue;
            best_label = label;
        }
    }
    report.expect_at_least("feasible runs", feasible, 1.0);
    report.expect_at_least("max distance of a feasible point from C_1", best, min_distance);
    report.expect_at_most("its constraint residual", best_residual, opt.feasibility_tol);
    report.expect_at_least("its min eigenvalue", best_eig, 0.0, opt.feasibility_tol);
    report.note(std::to_string(starts.size()) + " starts, " + std::to_string(feasible) +
                " feasible, farthest at " + fmt(best) + " from start " + best_label);
    report.set_runtime_ms(clock.elapsed_ms());
    return report;
}

}  // namespace qswitch
