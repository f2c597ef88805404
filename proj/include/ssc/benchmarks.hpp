#pragma once

#include "ssc/builtin_models.hpp"
#include "ssc/grid.hpp"
#include "ssc/model.hpp"
#include "ssc/scalar_field.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssc {

struct BenchmarkCase {
    std::string name;
    ModelSpec model;
    std::optional<ScalarField> oracle;  // empty for example2
    std::string notes;
    Grid grid;                          // default solve grid
    double inner_upper = 0.0;           // oracle error is measured on [0, inner_upper]^n
    double tolerance = 0.0;
    bool relative = false;
};

BenchmarkCase benchmark_case(std::string_view name, const Example3Params& p = {});

/// Throws NO_ORACLE for example2.
double oracle_value(const BenchmarkCase& c, const Eigen::VectorXd& x, int alpha);

/// Root z of coth(sqrt(2x)) = sqrt(2x), by bisection on [0.1, 2].
double example4_root();
/// The second classical solution of the squared Bessel QVI.
double example4_spurious(double x);
ScalarField example4_spurious_field();

/// Probe settings used for closed-form candidates: Richardson-extrapolated
/// central differences.
FiniteDifference candidate_fd();

/// max over samples and regimes of |min{F, min_i(D_i u - f_i)}|.
double check_interior_residual(const ScalarField& candidate, const ModelSpec& model,
                               std::span<const Eigen::VectorXd> samples,
                               const FiniteDifference& fd = candidate_fd());

/// phi(x) = u(x0) + a.(x - x0) + 1/2 (x - x0)'B(x - x0)
struct QuadraticProbe {
    Eigen::VectorXd a;
    Eigen::MatrixXd B;
};

struct ProbeLattice {
    int a_points = 21;
    double a_span = 5.0;
    int b_points = 11;
    double b_bound = 10.0;
};

struct ProbeVerdict {
    bool pass = true;                      // no violating touching probe found
    std::optional<QuadraticProbe> witness;
    double witness_value = 0.0;            // min{F, D phi - f} of the witness
    int tested = 0;
    int touching = 0;
};

/// Subsolution test on the closed domain at face point x0 (some x0_i = 0).
ProbeVerdict check_boundary_subsolution(const ScalarField& candidate, const ModelSpec& model,
                                        const Eigen::VectorXd& x0, int regime,
                                        std::span<const QuadraticProbe> probes);
ProbeVerdict check_boundary_subsolution(const ScalarField& candidate, const ModelSpec& model,
                                        const Eigen::VectorXd& x0, int regime,
                                        const ProbeLattice& lattice = {});

/// The explicit probes that refute x + c and c1 e^x + c2 e^-x at the origin.
QuadraticProbe probe_for_affine(double c);
QuadraticProbe probe_for_exponential(double c1, double c2);

ScalarField affine_candidate(double c);                    // x + c
ScalarField exponential_candidate(double c1, double c2);   // c1 e^x + c2 e^-x
ScalarField scaled_exponential_candidate(double k);        // k e^x

enum class Classification {
    kSolvesInterior,
    kFailsInterior,
    kBoundarySubsolutionOk,
    kBoundarySubsolutionFail,
};

std::string_view to_string(Classification c);

struct ViscosityCheckReport {
    double interior_max = 0.0;
    struct FacePoint {
        std::vector<double> x;
        int regime = 0;
        ProbeVerdict verdict;
    };
    std::vector<FacePoint> boundary;
    std::vector<Classification> classification;
};

ViscosityCheckReport viscosity_check(const ScalarField& candidate, const ModelSpec& model,
                                     std::span<const Eigen::VectorXd> interior_samples,
                                     std::span<const Eigen::VectorXd> face_points,
                                     double interior_tolerance = 1e-6,
                                     const ProbeLattice& lattice = {});

/// n-dimensional interior sample lattice strictly inside (lo, hi)^n.
std::vector<Eigen::VectorXd> interior_samples(int dim, double lo, double hi, int per_axis);

/// The solved field as a candidate (multilinear interpolation).
ScalarField field_candidate(const ValueField& field);

}  // namespace ssc
