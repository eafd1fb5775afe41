#include "aim/toyland.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aim/errors.hpp"
#include "aim/optim.hpp"

namespace aim::toy {

std::string_view problem_name(Problem p) {
    return p == Problem::ConvexPair ? "convex_pair" : "conflict_valley";
}

Problem parse_problem(std::string_view s) {
    if (s == "convex_pair") {
        return Problem::ConvexPair;
    }
    if (s == "conflict_valley") {
        return Problem::ConflictValley;
    }
    throw ConfigError("unknown problem '" + std::string(s) + "' (valid: convex_pair, conflict_valley)");
}

ToyEval toy_eval(Problem problem, std::span<const double> theta) {
    if (theta.size() != 2) {
        throw DimensionError("toy problems are two-dimensional");
    }
    const double x = theta[0];
    const double y = theta[1];
    if (!(x >= kDomainMin && x <= kDomainMax && y >= kDomainMin && y <= kDomainMax)) {
        throw DomainError("theta (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside [-6, 6]^2");
    }
    ToyEval e;
    if (problem == Problem::ConvexPair) {
        e.l1 = (x + 1.0) * (x + 1.0) + y * y;
        e.l2 = (x - 1.0) * (x - 1.0) + y * y;
        e.g1 = {2.0 * (x + 1.0), 2.0 * y};
        e.g2 = {2.0 * (x - 1.0), 2.0 * y};
        return e;
    }
    // Shallow bowl at (4, 0) with a Gaussian bump at (-1, 1.5), against a
    // steep bowl at (-4, -1).
    const double dx = x + 1.0;
    const double dy = y - 1.5;
    const double bump = 1.5 * std::exp(-(dx * dx + dy * dy));
    e.l1 = 0.05 * ((x - 4.0) * (x - 4.0) + y * y) + bump;
    e.g1 = {0.1 * (x - 4.0) - 2.0 * dx * bump, 0.1 * y - 2.0 * dy * bump};
    e.l2 = (x + 4.0) * (x + 4.0) + 0.5 * (y + 1.0) * (y + 1.0);
    e.g2 = {2.0 * (x + 4.0), y + 1.0};
    return e;
}

std::vector<FrontPoint> nondominated(std::vector<FrontPoint> points) {
    std::sort(points.begin(), points.end(), [](const FrontPoint& a, const FrontPoint& b) {
        return a.l1 != b.l1 ? a.l1 < b.l1 : a.l2 < b.l2;
    });
    std::vector<FrontPoint> front;
    double best_l2 = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        // With l1 ascending, p survives iff its l2 beats every earlier point.
        if (p.l2 < best_l2) {
            front.push_back(p);
            best_l2 = p.l2;
        }
    }
    return front;
}

ParetoFront pareto_front_oracle(Problem problem, int resolution) {
    if (resolution < 100) {
        throw ConfigError("pareto front resolution must be at least 100 per axis");
    }
    // A globally nondominated sample is nondominated within its own grid
    // column, so columns are filtered as they are produced.
    std::vector<FrontPoint> candidates;
    std::vector<FrontPoint> column(static_cast<std::size_t>(resolution));
    const double span = kDomainMax - kDomainMin;
    for (int ix = 0; ix < resolution; ++ix) {
        const double x = kDomainMin + span * ix / (resolution - 1);
        for (int iy = 0; iy < resolution; ++iy) {
            const double y = kDomainMin + span * iy / (resolution - 1);
            const double theta[2] = {x, y};
            const ToyEval e = toy_eval(problem, theta);
            column[static_cast<std::size_t>(iy)] = {x, y, e.l1, e.l2};
        }
        const auto local = nondominated(column);
        candidates.insert(candidates.end(), local.begin(), local.end());
    }
    return ParetoFront{nondominated(std::move(candidates)), resolution};
}

double distance_to_front(double l1, double l2, const ParetoFront& front) {
    if (front.points.empty()) {
        throw ConfigError("distance_to_front: empty front");
    }
    // Points are sorted by l1, and |dl1| bounds the distance from below, so
    // each direction of the scan stops once that bound exceeds the best hit.
    const auto& pts = front.points;
    const auto mid = std::lower_bound(pts.begin(), pts.end(), l1,
                                      [](const FrontPoint& p, double v) { return p.l1 < v; });
    double best = std::numeric_limits<double>::infinity();
    for (auto it = mid; it != pts.end() && it->l1 - l1 < best; ++it) {
        best = std::min(best, std::hypot(l1 - it->l1, l2 - it->l2));
    }
    for (auto it = mid; it != pts.begin();) {
        --it;
        if (l1 - it->l1 >= best) {
            break;
        }
        best = std::min(best, std::hypot(l1 - it->l1, l2 - it->l2));
    }
    return best;
}

Trajectory run_trajectory(Problem problem, Point2 start, const ToyRunConfig& config,
                          const ParetoFront& front) {
    Trajectory traj;
    traj.start = start;
    ParamVector theta{start[0], start[1]};

    optim::AdamState adam;
    adam.lr = config.lr;
    policy::PolicyState policy;
    if (is_aim(config.method)) {
        policy = policy::make_policy(policy_mode(config.method), 2);
        policy.temperature_k = config.temperature_k;
        policy.lambda_g = config.lambda_g;
        policy.lambda_m = config.lambda_m;
        policy.lambda_p = config.lambda_p;
    }

    auto record = [&](int step, const ToyEval& e) {
        traj.rows.push_back({step, theta[0], theta[1], e.l1, e.l2, distance_to_front(e.l1, e.l2, front)});
    };

    ToyEval e = toy_eval(problem, theta);
    record(0, e);
    traj.updates.reserve(static_cast<std::size_t>(config.steps));
    for (int step = 1; step <= config.steps; ++step) {
        GradientBundle bundle{{{e.g1[0], e.g1[1]}, {e.g2[0], e.g2[1]}}, {e.l1, e.l2}};
        // No data to split: the guidance losses are the landscape itself.
        const double guide[2] = {e.l1, e.l2};
        CombineOutcome out = combine_step(config.method, bundle, guide, &policy, config.policy_lr);
        Point2 delta{};
        optim::adam_step(adam, theta, out.applied, delta);
        traj.updates.push_back(delta);
        e = toy_eval(problem, theta);
        record(step, e);
    }
    traj.final_theta = {theta[0], theta[1]};
    return traj;
}

Point2 replay(Point2 start, std::span<const Point2> updates) {
    Point2 theta = start;
    for (const auto& u : updates) {
        theta[0] -= u[0];
        theta[1] -= u[1];
    }
    return theta;
}

} // namespace aim::toy
