#pragma once

// End-to-end orchestration of the closed-loop experiment: load a problem
// file, execute the sequence plan (optionally multi-threaded and with
// finite shots), assemble aGPSR derivatives from the stored evaluations,
// run the loss grid search and the extremization stage, and export all
// result tables.

#include "calibration.hpp"
#include "de_problem.hpp"
#include "dqc_trainer.hpp"
#include "gpsr.hpp"
#include "pulse_circuit.hpp"
#include "qel_extremizer.hpp"
#include "rng.hpp"
#include "rydberg_model.hpp"
#include "sampling.hpp"
#include "whittaker.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rydqel {

struct SamplingConfig {
	long shots = 100; // per multiplex copy per sequence
	int multiplex_copies = 2;
	double prep_failure_rate = 0.0;
};

struct ProblemConfig {
	std::string name;
	PolynomialDE de;
	std::vector<double> collocation;
	std::vector<double> theta_grid;
	std::vector<double> qel_extra_points;
	double qel_theta = 0;
	std::vector<double> shifts;
	std::vector<double> effective_gaps; // empty = derive from the FM generator
	CircuitSpec circuit;
	RegisterGeometry geometry;
	ScalingMap scaling;
	double boundary_weight = 1.0;
	double dedup_tolerance = 5e-3;
	double value_lookup_tolerance = 0.2; // nearest measured f for extremization
	SmootherConfig smoother;
	SamplingConfig sampling;

	RegisterGeometry copy_geometry() const
	{
		auto ids = geometry.group_ids();
		if (ids.empty())
			throw std::invalid_argument("problem: geometry has no atoms");
		return geometry.group_geometry(ids.front());
	}

	// Ideal square-pulse feature-map generator (2/Omega) H_FM; its spectrum
	// fixes the frequencies available to the circuit output.
	Matrix fm_generator() const
	{
		const RegisterGeometry copy = copy_geometry();
		DriveSample d{circuit.fm_omega, 0.0, 0.0};
		return (2.0 / circuit.fm_omega) * build_hamiltonian(d, copy);
	}

	GapSet resolved_effective_gaps() const
	{
		if (!effective_gaps.empty())
			return GapSet::of(effective_gaps);
		const RegisterGeometry copy = copy_geometry();
		const Vector ref = StateVector::ground(copy.n_atoms()).amplitudes;
		return dominant_effective_gaps(weighted_gaps_from_reference(fm_generator(), ref),
		                               shifts.size());
	}

	PlanRequest plan_request() const
	{
		return PlanRequest{collocation, de.boundary_x,     theta_grid,
		                   shifts,      qel_extra_points,  qel_theta,
		                   dedup_tolerance};
	}
};

inline ProblemConfig problem_from_json(const nlohmann::json& j)
{
	ProblemConfig p;
	p.name = j.value("name", "problem");
	p.de = de_from_json(j.at("de"));
	p.collocation = j.at("collocation").get<std::vector<double>>();
	p.theta_grid = j.at("theta_grid").get<std::vector<double>>();
	p.qel_extra_points = j.value("qel_extra_points", std::vector<double>{});
	p.qel_theta = j.value("qel_theta", p.theta_grid.empty() ? 0.0 : p.theta_grid.front());
	p.shifts = j.at("shifts").get<std::vector<double>>();
	if (j.contains("effective_gaps") && j.at("effective_gaps").is_array())
		p.effective_gaps = j.at("effective_gaps").get<std::vector<double>>();
	const auto& c = j.at("circuit");
	p.circuit.fm_omega = c.value("fm_omega", 9.0);
	p.circuit.ansatz_omega = c.value("ansatz_omega", 9.0);
	p.circuit.ansatz_duration = c.value("ansatz_duration", kPi / p.circuit.ansatz_omega);
	p.circuit.inter_pulse_delay = c.value("inter_pulse_delay", 0.0);
	p.circuit.delay_detuning = c.value("delay_detuning", 0.0);
	p.circuit.delta_offset = c.value("delta_offset", 0.0);
	p.circuit.modulation = c.value("modulation", std::string("ideal")) == "smoothed"
	                           ? Modulation::smoothed
	                           : Modulation::ideal;
	p.circuit.modulation_bandwidth = c.value("modulation_bandwidth", 50.0);
	p.circuit.integration_dt = c.value("integration_dt", 1e-3);
	p.circuit.max_sequence_duration = c.value("max_sequence_duration", 6.0);
	p.geometry = geometry_from_json(j.at("geometry"));
	if (j.contains("scaling")) {
		p.scaling.multiplier = j.at("scaling").value("multiplier", 1.0);
		p.scaling.offset = j.at("scaling").value("offset", 0.0);
	}
	p.boundary_weight = j.value("boundary_weight", 1.0);
	p.dedup_tolerance = j.value("dedup_tolerance", 5e-3);
	p.value_lookup_tolerance = j.value("value_lookup_tolerance", 0.2);
	if (j.contains("smoother")) {
		p.smoother.lambda = j.at("smoother").value("lambda", 10.0);
		p.smoother.order = j.at("smoother").value("order", 2);
	}
	if (j.contains("sampling")) {
		p.sampling.shots = j.at("sampling").value("shots", 100L);
		p.sampling.multiplex_copies = j.at("sampling").value("multiplex_copies", 2);
		p.sampling.prep_failure_rate = j.at("sampling").value("prep_failure_rate", 0.0);
	}
	return p;
}

inline ProblemConfig load_problem(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw std::runtime_error("cannot open problem file: " + path);
	nlohmann::json j;
	in >> j;
	return problem_from_json(j);
}

enum class RunMode { exact, sampled };

struct RunConfig {
	RunMode mode = RunMode::exact;
	long shots = 0;    // 0 = take from the problem file
	int copies = 0;    // 0 = take from the problem file
	std::uint64_t seed = 0;
	int jobs = 1;
	std::string out_dir;
};

// FNV-1a over the canonical config serialization, for provenance headers
// and result caching.
inline std::uint64_t fnv1a(const std::string& s)
{
	std::uint64_t h = 1469598103934665603ULL;
	for (unsigned char c : s) {
		h ^= c;
		h *= 1099511628211ULL;
	}
	return h;
}

inline std::string config_hash(const ProblemConfig& p, const RunConfig& r)
{
	nlohmann::json j = {{"name", p.name},
	                    {"de", de_to_json(p.de)},
	                    {"collocation", p.collocation},
	                    {"theta_grid", p.theta_grid},
	                    {"qel_extra_points", p.qel_extra_points},
	                    {"qel_theta", p.qel_theta},
	                    {"shifts", p.shifts},
	                    {"scaling", {p.scaling.multiplier, p.scaling.offset}},
	                    {"circuit",
	                     {p.circuit.fm_omega, p.circuit.ansatz_omega, p.circuit.ansatz_duration,
	                      p.circuit.inter_pulse_delay, p.circuit.delay_detuning,
	                      p.circuit.delta_offset, static_cast<int>(p.circuit.modulation)}},
	                    {"geometry", geometry_to_json(p.geometry)},
	                    {"mode", static_cast<int>(r.mode)},
	                    {"shots", r.shots},
	                    {"copies", r.copies},
	                    {"seed", r.seed},
	                    {"sampling",
	                     {p.sampling.shots, p.sampling.multiplex_copies,
	                      p.sampling.prep_failure_rate}}};
	std::ostringstream os;
	os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(j.dump());
	return os.str();
}

// Executed plan: estimates keyed by (theta, x_eval), raw magnetization units.
struct PlanResults {
	std::map<double, std::map<double, MagnetizationEstimate>> by_theta;
	long shots_used = 0;

	const MagnetizationEstimate* find(double theta, double x, double tol) const
	{
		auto t = by_theta.find(theta);
		if (t == by_theta.end())
			return nullptr;
		return detail::find_near(t->second, x, tol);
	}
};

inline MagnetizationEstimate execute_entry(const PlanEntry& e, const ProblemConfig& p,
                                           const RunConfig& cfg)
{
	const RegisterGeometry copy = p.copy_geometry();
	const StateVector psi = circuit_state(e.x_eval, e.theta, p.circuit, copy);
	if (cfg.mode == RunMode::exact) {
		MagnetizationEstimate est;
		est.value = expectation(psi, total_magnetization_op(copy.n_atoms()));
		est.exact = true;
		return est;
	}
	const long shots = cfg.shots > 0 ? cfg.shots : p.sampling.shots;
	const int copies = cfg.copies > 0 ? cfg.copies : p.sampling.multiplex_copies;
	std::vector<ShotRecord> records;
	for (int c = 0; c < copies; ++c) {
		const std::uint64_t seed = derive_seed(cfg.seed, e.x_eval, e.theta, 2 * c);
		ShotRecord rec = sample(psi, shots, seed);
		if (p.sampling.prep_failure_rate > 0)
			rec = apply_prep_failure(rec, p.sampling.prep_failure_rate,
			                         derive_seed(cfg.seed, e.x_eval, e.theta, 2 * c + 1));
		records.push_back(std::move(rec));
	}
	return magnetization_estimate(aggregate_multiplex(records));
}

inline PlanResults execute_plan(const SequencePlan& plan, const ProblemConfig& p,
                                const RunConfig& cfg)
{
	std::vector<MagnetizationEstimate> out(plan.size());
	const int jobs = std::max(1, cfg.jobs);
	if (jobs == 1) {
		for (std::size_t i = 0; i < plan.size(); ++i)
			out[i] = execute_entry(plan.entries[i], p, cfg);
	} else {
		std::vector<std::thread> workers;
		std::vector<std::exception_ptr> errors(jobs);
		for (int w = 0; w < jobs; ++w)
			workers.emplace_back([&, w] {
				try {
					for (std::size_t i = w; i < plan.size(); i += jobs)
						out[i] = execute_entry(plan.entries[i], p, cfg);
				} catch (...) {
					errors[w] = std::current_exception();
				}
			});
		for (auto& t : workers)
			t.join();
		for (auto& e : errors)
			if (e)
				std::rethrow_exception(e);
	}
	PlanResults res;
	for (std::size_t i = 0; i < plan.size(); ++i) {
		res.by_theta[plan.entries[i].theta][plan.entries[i].x_eval] = out[i];
		res.shots_used += out[i].shots;
	}
	return res;
}

// aGPSR derivative at grid point x from stored shifted evaluations.
inline DerivativeEstimate derivative_from_results(double x, double theta, const PlanResults& results,
                                                  const GapSet& gaps, const ShiftSet& shifts,
                                                  double lookup_tol)
{
	std::vector<MagnetizationEstimate> plus, minus;
	for (double s : shifts.shifts) {
		const MagnetizationEstimate* ep = results.find(theta, x + s, lookup_tol);
		const MagnetizationEstimate* em = results.find(theta, x - s, lookup_tol);
		if (!ep || !em)
			throw std::runtime_error("derivative_from_results: missing shifted evaluation");
		plus.push_back(*ep);
		minus.push_back(*em);
	}
	return gpsr_combine(x, gaps, shifts, plus, minus);
}

inline MagnetizationEstimate scale_estimate(const MagnetizationEstimate& e, const ScalingMap& s)
{
	MagnetizationEstimate out = e;
	out.value = s.apply(e.value);
	out.std_error = std::abs(s.multiplier) * e.std_error;
	return out;
}

inline DerivativeEstimate scale_derivative(const DerivativeEstimate& d, const ScalingMap& s)
{
	DerivativeEstimate out = d;
	out.value = s.apply_derivative(d.value);
	out.std_error = std::abs(s.multiplier) * d.std_error;
	return out;
}

struct RunOutcome {
	SequencePlan plan;
	PlanResults results;
	std::vector<double> gaps_used;
	// model-unit (scaled) maps
	std::map<double, std::map<double, DerivativeEstimate>> derivatives_by_theta; // at grid points
	std::map<double, std::map<double, MagnetizationEstimate>> scaled_by_theta;   // at measured points
	std::vector<LossReport> losses;
	double theta_opt = 0;
	ExtremizationResult extremum;
	Extremum analytic;
	std::size_t qel_new_evaluations = 0;
};

// Model value at a grid point: the nearest measured evaluation, within the
// configured tolerance (the grid points themselves are never executed).
inline std::map<double, MagnetizationEstimate>
values_at_grid(const std::vector<double>& grid, const std::map<double, MagnetizationEstimate>& measured,
               double tolerance)
{
	std::map<double, MagnetizationEstimate> out;
	for (double x : grid) {
		const MagnetizationEstimate* best = nullptr;
		double bestd = tolerance;
		for (const auto& [xm, est] : measured) {
			const double d = std::abs(xm - x);
			if (d <= bestd) {
				bestd = d;
				best = &est;
			}
		}
		if (!best)
			throw std::runtime_error("values_at_grid: no measurement near grid point");
		out[x] = *best;
	}
	return out;
}

inline RunOutcome run_pipeline(const ProblemConfig& p, const RunConfig& cfg,
                               const PlanResults* cached = nullptr)
{
	RunOutcome out;
	out.plan = plan_experiment(p.plan_request());
	out.results = cached ? *cached : execute_plan(out.plan, p, cfg);
	const GapSet gaps = p.resolved_effective_gaps();
	out.gaps_used = gaps.gaps;
	const ShiftSet shifts = ShiftSet::of(p.shifts);

	// DQC phase: derivatives at collocation points, loss per theta
	for (double theta : p.theta_grid) {
		std::map<double, MagnetizationEstimate> scaled;
		for (const auto& [x, est] : out.results.by_theta.at(theta))
			scaled[x] = scale_estimate(est, p.scaling);
		std::map<double, DerivativeEstimate> derivs;
		for (double x : p.collocation)
			derivs[x] = scale_derivative(
			    derivative_from_results(x, theta, out.results, gaps, shifts, p.dedup_tolerance),
			    p.scaling);
		LossWeights w;
		w.boundary_weight = p.boundary_weight;
		w.lookup_tolerance = p.dedup_tolerance;
		out.losses.push_back(evaluate_loss(theta, scaled, derivs, p.de, p.collocation, w));
		out.scaled_by_theta[theta] = std::move(scaled);
		out.derivatives_by_theta[theta] = std::move(derivs);
	}
	auto [theta_opt, reports] = grid_search(out.losses);
	out.theta_opt = theta_opt;
	out.losses = reports;

	// QEL phase: extend the derivative grid at the trained theta from stored
	// evaluations (no re-simulation) and extremize.
	const auto& prior = out.derivatives_by_theta.at(p.qel_theta);
	auto merged = extend_derivative_grid(
	    prior, p.qel_extra_points,
	    [&](double x) {
		    return scale_derivative(derivative_from_results(x, p.qel_theta, out.results, gaps,
		                                                    shifts, p.dedup_tolerance),
		                            p.scaling);
	    },
	    p.de.domain_lo, p.de.domain_hi, p.dedup_tolerance, &out.qel_new_evaluations);
	out.derivatives_by_theta[p.qel_theta] = merged;

	std::vector<double> grid;
	for (const auto& [x, d] : merged)
		grid.push_back(x);
	const auto grid_values =
	    values_at_grid(grid, out.scaled_by_theta.at(p.qel_theta), p.value_lookup_tolerance);
	out.extremum = find_extremum(merged, grid_values, ExtremumMode::grid_argmin);
	out.analytic = analytic_extremum(p.de);
	return out;
}

} // namespace rydqel
