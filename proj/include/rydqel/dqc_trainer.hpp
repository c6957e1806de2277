#pragma once

// Physics-informed loss over the theta grid:
//   l_d = sum_i (f'(x_i) - g(f(x_i), x_i))^2
//   l_b = |f(x_b) - boundary_value|
//   total = l_d + w_b * l_b^2
// Circuit magnetization is mapped into solution units by a fitted affine
// scaling before entering the residuals.

#include "de_problem.hpp"
#include "gpsr.hpp"
#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace rydqel {

struct ScalingMap {
	double multiplier = 1.0;
	double offset = 0.0;

	double apply(double raw) const { return multiplier * raw + offset; }
	double apply_derivative(double raw) const { return multiplier * raw; }
};

inline double scale_model_output(double raw_magnetization, const ScalingMap& scaling)
{
	return scaling.apply(raw_magnetization);
}

// Least-squares affine fit of a (noiseless) magnetization sweep against the
// analytic solution. The fitted map is stored in the problem config.
inline ScalingMap fit_output_scaling(const std::vector<double>& xs,
                                     const std::vector<double>& magnetizations,
                                     const PolynomialDE& de)
{
	if (xs.size() != magnetizations.size() || xs.size() < 2)
		throw std::invalid_argument("fit_output_scaling: need matched sweeps");
	double sm = 0, sf = 0, smm = 0, smf = 0;
	const double n = static_cast<double>(xs.size());
	for (std::size_t i = 0; i < xs.size(); ++i) {
		const double f = analytic_solution(de, xs[i]);
		sm += magnetizations[i];
		sf += f;
		smm += magnetizations[i] * magnetizations[i];
		smf += magnetizations[i] * f;
	}
	const double det = n * smm - sm * sm;
	if (std::abs(det) < 1e-12)
		throw std::runtime_error("fit_output_scaling: degenerate sweep");
	ScalingMap map;
	map.multiplier = (n * smf - sm * sf) / det;
	map.offset = (sf - map.multiplier * sm) / n;
	return map;
}

struct LossReport {
	double theta = 0;
	double l_d = 0;
	double l_b = 0;
	double total = 0;
	std::vector<double> residuals; // per collocation point, sorted by x
};

struct LossWeights {
	double boundary_weight = 1.0;
	double lookup_tolerance = 5e-3; // matching measured x keys to grid points
};

namespace detail {

template <typename T>
const T* find_near(const std::map<double, T>& m, double x, double tol)
{
	auto it = m.lower_bound(x - tol);
	if (it == m.end() || std::abs(it->first - x) > tol)
		return nullptr;
	return &it->second;
}

} // namespace detail

// model_outputs / derivatives are keyed by x and already in model units
// (scaling applied). The boundary value is looked up within tolerance, so a
// boundary point that coincides with a shifted evaluation needs no entry of
// its own.
inline LossReport evaluate_loss(double theta, const std::map<double, MagnetizationEstimate>& model_outputs,
                                const std::map<double, DerivativeEstimate>& derivatives,
                                const PolynomialDE& de, const std::vector<double>& collocation,
                                const LossWeights& weights = {})
{
	LossReport rep;
	rep.theta = theta;
	std::vector<double> coll = collocation;
	std::sort(coll.begin(), coll.end());
	for (double x : coll) {
		const DerivativeEstimate* d = detail::find_near(derivatives, x, weights.lookup_tolerance);
		if (!d)
			throw std::invalid_argument("evaluate_loss: missing derivative at collocation point");
		const MagnetizationEstimate* f = detail::find_near(model_outputs, x, weights.lookup_tolerance);
		const double fval = f ? f->value : 0.0; // this DE's g ignores f
		const double r = d->value - residual_target(de, fval, x);
		rep.residuals.push_back(r);
		rep.l_d += r * r;
	}
	const MagnetizationEstimate* fb =
	    detail::find_near(model_outputs, de.boundary_x, weights.lookup_tolerance);
	if (!fb)
		throw std::invalid_argument("evaluate_loss: missing boundary evaluation");
	rep.l_b = std::abs(fb->value - de.boundary_value);
	rep.total = rep.l_d + weights.boundary_weight * rep.l_b * rep.l_b;
	return rep;
}

// Argmin of total over the grid; ties break toward smaller theta.
inline std::pair<double, std::vector<LossReport>>
grid_search(const std::vector<LossReport>& reports)
{
	if (reports.empty())
		throw std::invalid_argument("grid_search: empty grid");
	std::vector<LossReport> sorted = reports;
	std::sort(sorted.begin(), sorted.end(),
	          [](const LossReport& a, const LossReport& b) { return a.theta < b.theta; });
	const LossReport* best = &sorted.front();
	for (const auto& r : sorted)
		if (r.total < best->total)
			best = &r;
	return {best->theta, sorted};
}

} // namespace rydqel
