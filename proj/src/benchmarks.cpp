#include "ssc/benchmarks.hpp"

#include "ssc/operators.hpp"

#include <algorithm>
#include <cmath>

namespace ssc {

namespace {

ScalarField affine_oracle(double slope1, double slope2, double intercept, std::string name) {
    ScalarField f;
    f.name = std::move(name);
    f.value = [=](const Eigen::VectorXd& x, int a) { return (a == 0 ? slope1 : slope2) * x.sum() + intercept; };
    f.gradient = [=](const Eigen::VectorXd& x, int a) {
        return Eigen::VectorXd::Constant(x.size(), a == 0 ? slope1 : slope2).eval();
    };
    f.hessian = [](const Eigen::VectorXd& x, int) { return Eigen::MatrixXd::Zero(x.size(), x.size()).eval(); };
    return f;
}

}  // namespace

BenchmarkCase benchmark_case(std::string_view name, const Example3Params& p) {
    if (name == "example1") {
        return {"example1", example1(), affine_oracle(1.0, 1.0, 1.0, "x+1"),
                "pays out continuously at unit rate after an initial lump", Grid({5.0}, {501}),
                4.0, 2e-3, false};
    }
    if (name == "example2") {
        return {"example2", example2(), std::nullopt,
                "no constrained viscosity solution exists; the scheme still returns a field",
                Grid({5.0}, {501}), 4.0, 0.0, false};
    }
    if (name == "example3") {
        if (!check_example3_params(p.mu1, p.mu2, p.r, p.lambda1, p.lambda2))
            throw Error(ErrorCode::kInvalidArgument, "example3 parameters violate the oracle's constraint on mu2");
        const double c = p.lambda2 / (p.lambda2 + p.r - p.mu2);
        ScalarField oracle = affine_oracle(1.0, c, 0.0, "x, c x");
        return {"example3", example3(p), std::move(oracle),
                "push everywhere in regime 1, never in regime 2", Grid({10.0}, {801}), 8.0, 1e-2, true};
    }
    if (name == "example4") {
        return {"example4", example4(), affine_oracle(1.0, 1.0, 1.0, "x+1"),
                "comparison conditions fail; a second classical solution exists",
                Grid({5.0}, {501}), 4.0, 5e-3, false};
    }
    throw Error(ErrorCode::kConfig, "unknown benchmark case '" + std::string(name) + "'");
}

double oracle_value(const BenchmarkCase& c, const Eigen::VectorXd& x, int alpha) {
    if (!c.oracle) throw Error(ErrorCode::kNoOracle, c.name + " has no closed-form value function");
    if ((x.array() < 0.0).any()) throw Error(ErrorCode::kInvalidArgument, "x outside the orthant");
    return c.oracle->value(x, alpha);
}

double example4_root() {
    static const double z = [] {
        auto g = [](double x) {
            const double y = std::sqrt(2.0 * x);
            return 1.0 / std::tanh(y) - y;
        };
        double lo = 0.1, hi = 2.0;  // g(lo) > 0 > g(hi)
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return z;
}

namespace {

double spurious_scale() {
    const double yz = std::sqrt(2.0 * example4_root());
    return yz / std::cosh(yz);
}

}  // namespace

double example4_spurious(double x) {
    if (x < 0.0) throw Error(ErrorCode::kInvalidArgument, "x must be nonnegative");
    const double z = example4_root();
    const double k = spurious_scale();
    if (x <= z) return k * std::sinh(std::sqrt(2.0 * x));
    return x - z + k * std::sinh(std::sqrt(2.0 * z));
}

ScalarField example4_spurious_field() {
    ScalarField f;
    f.name = "sinh branch";
    f.value = [](const Eigen::VectorXd& x, int) { return example4_spurious(std::max(x[0], 0.0)); };
    // y = sqrt(2x): u' = k cosh(y)/y, u'' = k (sinh(y)/y^2 - cosh(y)/y^3).
    f.gradient = [](const Eigen::VectorXd& x, int) {
        Eigen::VectorXd g(1);
        if (x[0] > example4_root()) {
            g[0] = 1.0;
        } else {
            const double y = std::sqrt(2.0 * x[0]);
            g[0] = spurious_scale() * std::cosh(y) / y;
        }
        return g;
    };
    f.hessian = [](const Eigen::VectorXd& x, int) {
        Eigen::MatrixXd h(1, 1);
        if (x[0] > example4_root()) {
            h(0, 0) = 0.0;
        } else {
            const double y = std::sqrt(2.0 * x[0]);
            h(0, 0) = spurious_scale() * (std::sinh(y) / (y * y) - std::cosh(y) / (y * y * y));
        }
        return h;
    };
    return f;
}

FiniteDifference candidate_fd() { return {1e-4, 1e-3, true}; }

double check_interior_residual(const ScalarField& candidate, const ModelSpec& model,
                               std::span<const Eigen::VectorXd> samples,
                               const FiniteDifference& fd) {
    const int m = model.regimes();
    double worst = 0.0;
    std::vector<double> xi(m);
    for (const auto& x : samples) {
        for (int j = 0; j < m; ++j) xi[j] = candidate.value(x, j);
        for (int a = 0; a < m; ++a) {
            const Jet jt = jet(candidate, x, a, fd);
            double combined = f_value(model, x, a, xi, jt.gradient, jt.hessian);
            const Eigen::VectorXd f = model.reward_at(x, a);
            for (Eigen::Index i = 0; i < x.size(); ++i) combined = std::min(combined, jt.gradient[i] - f[i]);
            worst = std::max(worst, std::abs(combined));
        }
    }
    return worst;
}

namespace {

double probe_value(const ModelSpec& model, const ScalarField& candidate, const Eigen::VectorXd& x0,
                   int regime, const QuadraticProbe& p) {
    const int m = model.regimes();
    std::vector<double> xi(m);
    for (int j = 0; j < m; ++j) xi[j] = candidate.value(x0, j);
    double v = f_value(model, x0, regime, xi, p.a, p.B);
    const Eigen::VectorXd f = model.reward_at(x0, regime);
    for (Eigen::Index i = 0; i < x0.size(); ++i) v = std::min(v, p.a[i] - f[i]);
    return v;
}

// phi - u >= 0 at small steps into the closed orthant.
bool touches_from_above(const ScalarField& candidate, const Eigen::VectorXd& x0, int regime,
                        const QuadraticProbe& p) {
    const auto n = x0.size();
    const double u0 = candidate.value(x0, regime);
    std::vector<Eigen::VectorXd> dirs;
    for (Eigen::Index i = 0; i < n; ++i) {
        dirs.push_back(Eigen::VectorXd::Unit(n, i));
        if (x0[i] > 0.0) dirs.push_back(-Eigen::VectorXd::Unit(n, i));
    }
    if (n > 1) dirs.push_back(Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n)));
    for (const auto& d : dirs) {
        for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const Eigen::VectorXd x = x0 + t * d;
            if ((x.array() < 0.0).any()) continue;
            const Eigen::VectorXd dx = x - x0;
            const double phi = u0 + p.a.dot(dx) + 0.5 * dx.dot(p.B * dx);
            const double u = candidate.value(x, regime);
            if (phi - u < -1e-12 * (1.0 + std::abs(u))) return false;
        }
    }
    return true;
}

}  // namespace

ProbeVerdict check_boundary_subsolution(const ScalarField& candidate, const ModelSpec& model,
                                        const Eigen::VectorXd& x0, int regime,
                                        std::span<const QuadraticProbe> probes) {
    if (!(x0.array() == 0.0).any())
        throw Error(ErrorCode::kInvalidArgument, "boundary probe point must lie on a face");
    ProbeVerdict verdict;
    for (const auto& p : probes) {
        ++verdict.tested;
        if (!touches_from_above(candidate, x0, regime, p)) continue;
        ++verdict.touching;
        const double v = probe_value(model, candidate, x0, regime, p);
        if (v > 1e-8 && (verdict.pass || v > verdict.witness_value)) {
            verdict.pass = false;
            verdict.witness = p;
            verdict.witness_value = v;
        }
    }
    return verdict;
}

ProbeVerdict check_boundary_subsolution(const ScalarField& candidate, const ModelSpec& model,
                                        const Eigen::VectorXd& x0, int regime,
                                        const ProbeLattice& lattice) {
    const auto n = static_cast<int>(x0.size());
    Eigen::VectorXd base(n);
    const double h = 1e-5;
    const double u0 = candidate.value(x0, regime);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
        base[i] = (-3.0 * u0 + 4.0 * candidate.value(x0 + h * e, regime) -
                   candidate.value(x0 + 2.0 * h * e, regime)) / (2.0 * h);
    }
    auto level = [](int k, int count, double lo, double hi) {
        return count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    };
    std::vector<QuadraticProbe> probes;
    long a_total = 1, b_total = 1;
    for (int i = 0; i < n; ++i) {
        a_total *= lattice.a_points;
        b_total *= lattice.b_points;
    }
    for (long ai = 0; ai < a_total; ++ai) {
        Eigen::VectorXd a(n);
        long rem = ai;
        for (int i = 0; i < n; ++i) {
            a[i] = level(static_cast<int>(rem % lattice.a_points), lattice.a_points, base[i], base[i] + lattice.a_span);
            rem /= lattice.a_points;
        }
        for (long bi = 0; bi < b_total; ++bi) {
            Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
            long r2 = bi;
            for (int i = 0; i < n; ++i) {
                b(i, i) = level(static_cast<int>(r2 % lattice.b_points), lattice.b_points, -lattice.b_bound, lattice.b_bound);
                r2 /= lattice.b_points;
            }
            probes.push_back({a, b});
        }
    }
    return check_boundary_subsolution(candidate, model, x0, regime, probes);
}

QuadraticProbe probe_for_affine(double c) {
    // phi(x) = c + 2x - (1 - c/2) x^2
    return {Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Constant(1, 1, -(2.0 - c))};
}

QuadraticProbe probe_for_exponential(double c1, double c2) {
    // phi(x) = (c1 + c2) + (|c1 - c2| + 2) x + (c1 + c2) x^2 / 3
    return {Eigen::VectorXd::Constant(1, std::abs(c1 - c2) + 2.0),
            Eigen::MatrixXd::Constant(1, 1, 2.0 * (c1 + c2) / 3.0)};
}

ScalarField affine_candidate(double c) {
    ScalarField f = affine_oracle(1.0, 1.0, c, "x+c");
    return f;
}

ScalarField exponential_candidate(double c1, double c2) {
    ScalarField f;
    f.name = "c1 e^x + c2 e^-x";
    f.value = [=](const Eigen::VectorXd& x, int) { return c1 * std::exp(x[0]) + c2 * std::exp(-x[0]); };
    f.gradient = [=](const Eigen::VectorXd& x, int) {
        return Eigen::VectorXd::Constant(1, c1 * std::exp(x[0]) - c2 * std::exp(-x[0])).eval();
    };
    f.hessian = [=](const Eigen::VectorXd& x, int) {
        return Eigen::MatrixXd::Constant(1, 1, c1 * std::exp(x[0]) + c2 * std::exp(-x[0])).eval();
    };
    return f;
}

ScalarField scaled_exponential_candidate(double k) {
    ScalarField f;
    f.name = "k e^x";
    f.value = [=](const Eigen::VectorXd& x, int) { return k * std::exp(x[0]); };
    return f;
}

std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::kSolvesInterior: return "SOLVES_INTERIOR";
        case Classification::kFailsInterior: return "FAILS_INTERIOR";
        case Classification::kBoundarySubsolutionOk: return "BOUNDARY_SUBSOLUTION_OK";
        case Classification::kBoundarySubsolutionFail: return "BOUNDARY_SUBSOLUTION_FAIL";
    }
    return "UNKNOWN";
}

ViscosityCheckReport viscosity_check(const ScalarField& candidate, const ModelSpec& model,
                                     std::span<const Eigen::VectorXd> interior,
                                     std::span<const Eigen::VectorXd> face_points,
                                     double interior_tolerance, const ProbeLattice& lattice) {
    ViscosityCheckReport report;
    report.interior_max = check_interior_residual(candidate, model, interior);
    report.classification.push_back(report.interior_max <= interior_tolerance
                                        ? Classification::kSolvesInterior
                                        : Classification::kFailsInterior);
    bool all_ok = true;
    for (const auto& x0 : face_points) {
        for (int a = 0; a < model.regimes(); ++a) {
            auto verdict = check_boundary_subsolution(candidate, model, x0, a, lattice);
            all_ok = all_ok && verdict.pass;
            report.boundary.push_back({{x0.data(), x0.data() + x0.size()}, a, std::move(verdict)});
        }
    }
    if (!face_points.empty())
        report.classification.push_back(all_ok ? Classification::kBoundarySubsolutionOk
                                               : Classification::kBoundarySubsolutionFail);
    return report;
}

std::vector<Eigen::VectorXd> interior_samples(int dim, double lo, double hi, int per_axis) {
    std::vector<Eigen::VectorXd> out;
    std::size_t count = 1;
    for (int k = 0; k < dim; ++k) count *= static_cast<std::size_t>(per_axis);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Eigen::VectorXd x(dim);
        std::size_t rem = idx;
        for (int k = dim - 1; k >= 0; --k) {
            const auto i = rem % static_cast<std::size_t>(per_axis);
            rem /= static_cast<std::size_t>(per_axis);
            x[k] = lo + (hi - lo) * static_cast<double>(i + 1) / (per_axis + 1);
        }
        out.push_back(std::move(x));
    }
    return out;
}

ScalarField field_candidate(const ValueField& field) {
    ScalarField f;
    f.name = "solved field";
    f.value = [field](const Eigen::VectorXd& x, int a) { return field.interpolate(x, a); };
    return f;
}

}  // namespace ssc
