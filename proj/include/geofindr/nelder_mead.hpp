#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace geofindr {

struct NelderMeadOptions {
    double f_tolerance = 1e-12; // stop when the simplex value spread drops below this
    int max_evals = 20000;
    std::vector<double> initial_step; // per dimension; 0.1 where unspecified
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evals = 0;
    bool converged = false;
};

/**
 * Derivative-free simplex minimizer (reflection 1, expansion 2,
 * contraction 0.5, shrink 0.5). Deterministic: ties in vertex ordering
 * break by insertion order, so the same start always walks the same path.
 */
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, NelderMeadOptions options = {}) {
    const std::size_t dim = x0.size();
    NelderMeadResult result;
    result.x = x0;
    if (dim == 0) {
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex;
    std::vector<double> values;
    simplex.reserve(dim + 1);
    values.reserve(dim + 1);

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };

    simplex.push_back(x0);
    values.push_back(eval(x0));
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> vertex = x0;
        double step = i < options.initial_step.size() ? options.initial_step[i] : 0.1;
        vertex[i] += (step != 0.0 ? step : 0.1);
        simplex.push_back(vertex);
        values.push_back(eval(vertex));
    }

    std::vector<std::size_t> order(dim + 1);
    bool converged = false;

    while (evals < options.max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::size_t best = order.front();
        std::size_t worst = order.back();
        std::size_t second_worst = order[dim - 1];

        if (values[worst] - values[best] <= options.f_tolerance) {
            converged = true;
            break;
        }

        // Centroid of every vertex but the worst.
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                x[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
            }
            return x;
        };

        std::vector<double> reflected = blend(-1.0);
        double f_reflected = eval(reflected);

        if (f_reflected < values[best]) {
            std::vector<double> expanded = blend(-2.0);
            double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = std::move(expanded);
                values[worst] = f_expanded;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = f_reflected;
            }
        } else if (f_reflected < values[second_worst]) {
            simplex[worst] = std::move(reflected);
            values[worst] = f_reflected;
        } else {
            bool outside = f_reflected < values[worst];
            std::vector<double> contracted = blend(outside ? -0.5 : 0.5);
            double f_contracted = eval(contracted);
            double bar = outside ? f_reflected : values[worst];
            if (f_contracted < bar) {
                simplex[worst] = std::move(contracted);
                values[worst] = f_contracted;
            } else {
                // Shrink everything toward the best vertex.
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < dim; ++d) {
                        simplex[i][d] =
                            simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
                    }
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i) {
        if (values[i] < values[best]) best = i;
    }
    result.x = simplex[best];
    result.fx = values[best];
    result.evals = evals;
    result.converged = converged;
    return result;
}

} // namespace geofindr
