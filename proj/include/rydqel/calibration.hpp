#pragma once

// Detuning-offset calibration: fit a constant delta_offset, applied to the
// whole sequence, that minimizes the RMSD between measured and simulated
// magnetization weighted by statistical error. Coarse scan, then golden
// section refinement.

#include "pulse_circuit.hpp"
#include "sampling.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rydqel {

// Hardware detuning accuracy from the device characterization; recoveries
// beyond this get a warning flag, not an error.
constexpr double kDetuningAccuracyWarn = 2.0 * kPi * 0.100; // rad/us

using DataKey = std::pair<double, double>; // (x, theta)

struct CalibrationResult {
	double delta_offset = 0;
	double weighted_rmsd_before = 0;
	double weighted_rmsd_after = 0;
	std::vector<std::pair<double, double>> scan; // (delta, rmsd)
	bool exceeds_hardware_spec = false;
	std::size_t skipped_zero_error = 0;
};

inline double weighted_rmsd(const std::map<DataKey, MagnetizationEstimate>& data,
                            const std::map<DataKey, double>& sim,
                            std::size_t* skipped_zero_error = nullptr)
{
	double num = 0, den = 0;
	std::size_t used = 0, skipped = 0;
	for (const auto& [key, est] : data) {
		const auto it = sim.find(key);
		if (it == sim.end())
			continue;
		if (est.std_error <= 0) {
			++skipped;
			continue;
		}
		const double w = 1.0 / (est.std_error * est.std_error);
		const double r = est.value - it->second;
		num += w * r * r;
		den += w;
		++used;
	}
	if (skipped_zero_error)
		*skipped_zero_error = skipped;
	if (used == 0)
		throw std::invalid_argument("weighted_rmsd: no usable overlapping points");
	return std::sqrt(num / den);
}

struct CalibrationOptions {
	double search_lo = -3.0;        // rad/us
	double search_hi = 1.0;
	int scan_points = 41;
	double tolerance = 2.0 * kPi * 0.001; // rad/us
};

inline CalibrationResult fit_detuning_offset(const std::map<DataKey, MagnetizationEstimate>& data,
                                             const CircuitSpec& spec,
                                             const RegisterGeometry& geometry,
                                             const CalibrationOptions& opt = {})
{
	if (opt.search_hi <= opt.search_lo || opt.scan_points < 3)
		throw std::invalid_argument("fit_detuning_offset: bad search interval");

	CalibrationResult res;
	auto objective = [&](double delta) {
		CircuitSpec s = spec;
		s.delta_offset = delta;
		std::map<DataKey, double> sim;
		for (const auto& [key, est] : data)
			sim[key] = run_circuit(key.first, key.second, s, geometry).value;
		return weighted_rmsd(data, sim, &res.skipped_zero_error);
	};

	res.weighted_rmsd_before = objective(spec.delta_offset);

	int best = 0;
	for (int i = 0; i < opt.scan_points; ++i) {
		const double d = opt.search_lo +
		                 (opt.search_hi - opt.search_lo) * i / (opt.scan_points - 1);
		const double v = objective(d);
		res.scan.emplace_back(d, v);
		if (!std::isfinite(v))
			throw std::runtime_error("fit_detuning_offset: objective not finite");
		if (v < res.scan[best].second)
			best = i;
	}
	if (best == 0 || best == opt.scan_points - 1)
		throw std::runtime_error("fit_detuning_offset: search interval does not bracket a minimum");

	double a = res.scan[best - 1].first;
	double b = res.scan[best + 1].first;
	const double gr = 0.5 * (1.0 + std::sqrt(5.0));
	double c = b - (b - a) / gr;
	double d = a + (b - a) / gr;
	double fc = objective(c), fd = objective(d);
	while (b - a > opt.tolerance) {
		if (fc < fd) {
			b = d;
			d = c;
			fd = fc;
			c = b - (b - a) / gr;
			fc = objective(c);
		} else {
			a = c;
			c = d;
			fc = fd;
			d = a + (b - a) / gr;
			fd = objective(d);
		}
	}
	res.delta_offset = 0.5 * (a + b);
	res.weighted_rmsd_after = std::min(objective(res.delta_offset), res.weighted_rmsd_before);
	res.exceeds_hardware_spec = std::abs(res.delta_offset) > kDetuningAccuracyWarn;
	return res;
}

inline nlohmann::json calibration_to_json(const CalibrationResult& r)
{
	nlohmann::json scan = nlohmann::json::array();
	for (const auto& [d, v] : r.scan)
		scan.push_back({{"delta_offset", d}, {"weighted_rmsd", v}});
	return {{"delta_offset", r.delta_offset},
	        {"weighted_rmsd_before", r.weighted_rmsd_before},
	        {"weighted_rmsd_after", r.weighted_rmsd_after},
	        {"exceeds_hardware_spec", r.exceeds_hardware_spec},
	        {"skipped_zero_error", r.skipped_zero_error},
	        {"scan", scan}};
}

} // namespace rydqel
