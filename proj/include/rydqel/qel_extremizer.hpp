#pragma once

// Extremization phase: with theta fixed at its trained value, locate the
// input x minimizing the learned model from the sign structure of the
// aGPSR derivative grid. The derivative crosses zero at every stationary
// point; the model value filters out maxima and inflections.

#include "dqc_trainer.hpp"
#include "gpsr.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydqel {

enum class ExtremumMode { grid_argmin, sign_change_interpolation };

struct ExtremumCandidate {
	double x = 0;
	double derivative = 0;
	double f = 0;
	std::string classification; // minimum | maximum | inflection
};

struct ExtremizationResult {
	double x_opt = 0;
	double f_at_opt = 0;
	std::vector<ExtremumCandidate> candidates; // sorted by x
	std::string method;
	bool endpoint_fallback = false; // no interior minimum found
};

namespace detail {

inline double value_near(const std::map<double, MagnetizationEstimate>& values, double x,
                         double tol = 5e-3)
{
	if (const MagnetizationEstimate* v = find_near(values, x, tol))
		return v->value;
	throw std::invalid_argument("find_extremum: missing model value at grid point");
}

} // namespace detail

inline ExtremizationResult find_extremum(const std::map<double, DerivativeEstimate>& derivatives,
                                         const std::map<double, MagnetizationEstimate>& values,
                                         ExtremumMode mode = ExtremumMode::grid_argmin)
{
	if (derivatives.size() < 3)
		throw std::invalid_argument("find_extremum: need at least 3 derivative points");
	std::vector<double> xs, ds;
	for (const auto& [x, d] : derivatives) {
		xs.push_back(x);
		ds.push_back(d.value);
	}

	ExtremizationResult res;
	res.method = (mode == ExtremumMode::grid_argmin) ? "grid-argmin" : "sign-change-interpolation";
	for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
		const double d0 = ds[i], d1 = ds[i + 1];
		if (d0 == 0 || d0 * d1 >= 0)
			continue;
		ExtremumCandidate c;
		c.classification = (d0 < 0) ? "minimum" : "maximum";
		if (mode == ExtremumMode::grid_argmin) {
			const std::size_t pick = (std::abs(d0) <= std::abs(d1)) ? i : i + 1;
			c.x = xs[pick];
			c.derivative = ds[pick];
			c.f = detail::value_near(values, c.x);
		} else {
			const double t = d0 / (d0 - d1);
			c.x = xs[i] + t * (xs[i + 1] - xs[i]);
			c.derivative = 0;
			const double f0 = detail::value_near(values, xs[i]);
			const double f1 = detail::value_near(values, xs[i + 1]);
			c.f = f0 + t * (f1 - f0);
		}
		res.candidates.push_back(c);
	}
	// flat zero-derivative points without a sign change: inflections
	for (std::size_t i = 1; i + 1 < xs.size(); ++i)
		if (ds[i] == 0 && ds[i - 1] * ds[i + 1] > 0)
			res.candidates.push_back({xs[i], 0.0, detail::value_near(values, xs[i]), "inflection"});
	std::sort(res.candidates.begin(), res.candidates.end(),
	          [](const ExtremumCandidate& a, const ExtremumCandidate& b) { return a.x < b.x; });

	const ExtremumCandidate* best = nullptr;
	for (const auto& c : res.candidates)
		if (c.classification == "minimum" && (!best || c.f < best->f))
			best = &c;
	if (best) {
		res.x_opt = best->x;
		res.f_at_opt = best->f;
		return res;
	}
	// no interior minimum: fall back to the cheaper endpoint, flagged
	const double flo = detail::value_near(values, xs.front());
	const double fhi = detail::value_near(values, xs.back());
	res.endpoint_fallback = true;
	res.x_opt = (flo <= fhi) ? xs.front() : xs.back();
	res.f_at_opt = std::min(flo, fhi);
	res.candidates.push_back({res.x_opt, derivatives.at(res.x_opt).value, res.f_at_opt, "minimum"});
	return res;
}

// Merge stored derivatives with newly computed ones at the extra points;
// already-evaluated grid points are reused, never re-simulated.
inline std::map<double, DerivativeEstimate>
extend_derivative_grid(const std::map<double, DerivativeEstimate>& prior,
                       const std::vector<double>& extra_points,
                       const std::function<DerivativeEstimate(double)>& compute,
                       double domain_lo, double domain_hi, double dedup_tolerance = 5e-3,
                       std::size_t* new_evaluations = nullptr)
{
	std::map<double, DerivativeEstimate> merged = prior;
	std::size_t fresh = 0;
	for (double x : extra_points) {
		if (x < domain_lo || x > domain_hi)
			throw std::invalid_argument("extend_derivative_grid: extra point outside domain");
		if (detail::find_near(merged, x, dedup_tolerance))
			continue;
		merged[x] = compute(x);
		++fresh;
	}
	if (new_evaluations)
		*new_evaluations = fresh;
	return merged;
}

inline nlohmann::json extremization_to_json(const ExtremizationResult& r)
{
	nlohmann::json cands = nlohmann::json::array();
	for (const auto& c : r.candidates)
		cands.push_back({{"x", c.x},
		                 {"df_dx", c.derivative},
		                 {"f", c.f},
		                 {"classification", c.classification}});
	return {{"x_opt", r.x_opt},
	        {"f_at_opt", r.f_at_opt},
	        {"method", r.method},
	        {"endpoint_fallback", r.endpoint_fallback},
	        {"candidates", cands}};
}

} // namespace rydqel
