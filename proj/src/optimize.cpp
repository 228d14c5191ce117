#include "driftwatch/optimize.hpp"

#include "driftwatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace driftwatch {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(int index, int base) {
    double result = 0.0;
    double fraction = 1.0 / base;
    while (index > 0) {
        result += (index % base) * fraction;
        index /= base;
        fraction /= base;
    }
    return result;
}

Vector clamp_to(const std::vector<Interval>& box, Vector v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = box[static_cast<std::size_t>(j)].clamp(v(j));
    return v;
}

struct Counted {
    const std::function<double(const Vector&)>& fn;
    int evaluations = 0;

    // Non-finite values are treated as the worst possible point.
    double operator()(const Vector& v) {
        ++evaluations;
        const double y = fn(v);
        return std::isfinite(y) ? y : -std::numeric_limits<double>::infinity();
    }
};

struct RunResult {
    Vector best;
    double value;
    int iterations;
    int evaluations;
    bool converged;
};

// Minimizes -objective; standard coefficients (1, 2, 0.5, 0.5).
RunResult nelder_mead(const std::function<double(const Vector&)>& objective,
                      const std::vector<Interval>& box, const Vector& start,
                      const NelderMeadOptions& options) {
    const auto dim = start.size();
    Counted f{objective};
    std::vector<Vector> simplex;
    std::vector<double> values;
    simplex.reserve(static_cast<std::size_t>(dim + 1));
    simplex.push_back(clamp_to(box, start));
    for (Eigen::Index j = 0; j < dim; ++j) {
        const auto& iv = box[static_cast<std::size_t>(j)];
        Vector v = simplex.front();
        const double width = iv.hi - iv.lo;
        double edge = options.initial_scale * (width > 0.0 ? width : std::max(1.0, std::abs(v(j))));
        // Step inward from a face of the box.
        if (v(j) + edge > iv.hi) edge = -edge;
        v(j) += edge;
        simplex.push_back(clamp_to(box, v));
    }
    for (const auto& v : simplex) values.push_back(-f(v));

    std::vector<std::size_t> order(simplex.size());
    int iterations = 0;
    bool converged = false;
    while (f.evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        double diameter = 0.0;
        for (const auto& v : simplex) diameter = std::max(diameter, (v - simplex[best]).norm());
        if (diameter < options.simplex_tolerance) {
            converged = true;
            break;
        }
        ++iterations;

        Vector centroid = Vector::Zero(dim);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != worst) centroid += simplex[i];
        }
        centroid /= static_cast<double>(dim);

        const Vector reflected = clamp_to(box, centroid + (centroid - simplex[worst]));
        const double f_reflected = -f(reflected);
        if (f_reflected < values[best]) {
            const Vector expanded = clamp_to(box, centroid + 2.0 * (centroid - simplex[worst]));
            const double f_expanded = -f(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const Vector contracted = outside ? Vector(clamp_to(box, centroid + 0.5 * (reflected - centroid)))
                                          : Vector(clamp_to(box, centroid + 0.5 * (simplex[worst] - centroid)));
        const double f_contracted = -f(contracted);
        if (f_contracted < (outside ? f_reflected : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i == best) continue;
            simplex[i] = clamp_to(box, simplex[best] + 0.5 * (simplex[i] - simplex[best]));
            values[i] = -f(simplex[i]);
        }
    }
    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best = static_cast<std::size_t>(best_it - values.begin());
    return {simplex[best], -values[best], iterations, f.evaluations, converged};
}

}  // namespace

std::vector<Vector> halton_probes(const std::vector<Interval>& box, int count) {
    std::vector<Vector> probes;
    const auto dim = static_cast<Eigen::Index>(box.size());
    for (int i = 1; i <= count; ++i) {
        Vector p(dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const auto& iv = box[static_cast<std::size_t>(j)];
            const int base = kPrimes[static_cast<std::size_t>(j) % std::size(kPrimes)];
            p(j) = iv.lo + (iv.hi - iv.lo) * radical_inverse(i, base);
        }
        probes.push_back(p);
    }
    return probes;
}

OptimizeResult maximize_in_box(const std::function<double(const Vector&)>& objective,
                               const std::vector<Interval>& box, const NelderMeadOptions& options) {
    if (box.empty()) throw DomainError("optimizer needs a non-empty box");
    OptimizeResult result;
    result.value = -std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (const auto& start : halton_probes(box, std::max(1, options.restarts))) {
        const RunResult run = nelder_mead(objective, box, start, options);
        result.trace.iterations += run.iterations;
        result.trace.evaluations += run.evaluations;
        any_converged = any_converged || run.converged;
        if (run.value > result.value) {
            result.value = run.value;
            result.argmax = run.best;
        }
    }
    if (!std::isfinite(result.value)) throw OptimizerFailure("objective is non-finite on every probe");

    // Polish with a shrunken simplex around the incumbent.
    NelderMeadOptions polish = options;
    polish.initial_scale = options.initial_scale * 1e-3;
    const RunResult final_run = nelder_mead(objective, box, result.argmax, polish);
    result.trace.iterations += final_run.iterations;
    result.trace.evaluations += final_run.evaluations;
    if (final_run.value >= result.value) {
        result.value = final_run.value;
        result.argmax = final_run.best;
    }
    result.trace.converged = final_run.converged;
    if (!any_converged && !final_run.converged) {
        throw OptimizerFailure("Nelder-Mead did not converge within the evaluation budget");
    }
    result.trace.final_gradient_norm = numeric_gradient_norm(objective, result.argmax, box);
    return result;
}

double numeric_gradient_norm(const std::function<double(const Vector&)>& objective,
                             const Vector& at, const std::vector<Interval>& box) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < at.size(); ++j) {
        const auto& iv = box[static_cast<std::size_t>(j)];
        const double step = 1e-6 * std::max(1.0, std::abs(at(j)));
        Vector up = at;
        Vector down = at;
        up(j) = iv.clamp(at(j) + step);
        down(j) = iv.clamp(at(j) - step);
        if (up(j) == down(j)) continue;
        const double g = (objective(up) - objective(down)) / (up(j) - down(j));
        sq += g * g;
    }
    return std::sqrt(sq);
}

}  // namespace driftwatch
