#pragma once
// Two-task 2D landscapes with closed-form gradients, a grid-based Pareto
// front, and trajectory recording for method comparisons.

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "aim/aim_policy.hpp"
#include "aim/method.hpp"

namespace aim::toy {

enum class Problem { ConvexPair, ConflictValley };

std::string_view problem_name(Problem p);
Problem parse_problem(std::string_view s);

inline constexpr double kDomainMin = -6.0;
inline constexpr double kDomainMax = 6.0;

using Point2 = std::array<double, 2>;

struct ToyEval {
    double l1 = 0.0;
    double l2 = 0.0;
    Point2 g1{};
    Point2 g2{};
};

/// Losses and gradients at theta; throws DomainError outside [-6, 6]^2.
ToyEval toy_eval(Problem problem, std::span<const double> theta);

struct FrontPoint {
    double x;
    double y;
    double l1;
    double l2;
};

struct ParetoFront {
    std::vector<FrontPoint> points;  // sorted by l1 ascending, l2 descending
    int resolution = 0;
};

/// Nondominated subset of points; exact loss duplicates are kept once.
std::vector<FrontPoint> nondominated(std::vector<FrontPoint> points);

inline constexpr int kDefaultFrontResolution = 6001;

/// Evaluates a resolution x resolution grid over the domain and keeps the
/// nondominated samples.
ParetoFront pareto_front_oracle(Problem problem, int resolution = kDefaultFrontResolution);

/// Euclidean distance in loss space to the closest front point.
double distance_to_front(double l1, double l2, const ParetoFront& front);

inline constexpr std::array<Point2, 5> kStartGrid{{{0.0, 3.0}, {3.0, 3.0}, {-3.0, 3.0}, {3.0, -3.0}, {-3.0, -3.0}}};

struct ToyRunConfig {
    Method method = Method::Ls;
    int steps = 2000;
    double lr = 0.01;
    double policy_lr = 5e-4;
    double temperature_k = 10.0;
    double lambda_g = 1.0;
    double lambda_m = 0.01;
    double lambda_p = 0.08;
};

struct TrajectoryRow {
    int step;
    double x;
    double y;
    double l1;
    double l2;
    double dist_front;
};

struct Trajectory {
    Point2 start{};
    std::vector<TrajectoryRow> rows;   // rows[0] is the start, rows[s] after s updates
    std::vector<Point2> updates;       // amount subtracted from theta at each step
    Point2 final_theta{};
};

Trajectory run_trajectory(Problem problem, Point2 start, const ToyRunConfig& config,
                          const ParetoFront& front);

/// Re-applies recorded updates from start; bitwise equal to the original
/// final theta.
Point2 replay(Point2 start, std::span<const Point2> updates);

} // namespace aim::toy
