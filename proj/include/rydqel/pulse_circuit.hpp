#pragma once

// Algorithmic circuit -> pulse sequence translation and execution.
// The feature map is a square drive of amplitude fm_omega and duration
// x / fm_omega; the ansatz is a fixed-amplitude pulse whose phase is the
// single variational parameter theta.

#include "quantum_core.hpp"
#include "rydberg_model.hpp"
#include "sampling.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydqel {

struct PulseSegment {
	enum class Kind { drive, delay };
	Kind kind = Kind::drive;
	double duration = 0; // us
	double omega = 0;    // rad/us
	double delta = 0;    // rad/us
	double phi = 0;      // rad
};

enum class Modulation { ideal, smoothed };

struct CircuitSpec {
	double fm_omega = 9.0;
	double ansatz_omega = 9.0;
	double ansatz_duration = kPi / 9.0; // a pi-area pulse unless configured
	double inter_pulse_delay = 0.0;
	double delay_detuning = 0.0;
	double delta_offset = 0.0; // constant detuning offset over the whole sequence
	Modulation modulation = Modulation::ideal;
	double modulation_bandwidth = 50.0; // rad/us, first-order low-pass on omega
	double integration_dt = 1e-3;       // us, stepped-integration step
	double max_sequence_duration = 6.0; // us

	double sequence_duration(double x) const
	{
		return x / fm_omega + inter_pulse_delay + ansatz_duration;
	}
};

inline std::vector<PulseSegment> build_sequence(double x, double theta, const CircuitSpec& spec)
{
	if (spec.fm_omega <= 0)
		throw std::invalid_argument("build_sequence: fm_omega must be positive");
	if (x <= 0)
		throw std::invalid_argument("build_sequence: feature value must be positive");
	if (spec.sequence_duration(x) > spec.max_sequence_duration)
		throw std::invalid_argument("build_sequence: sequence exceeds max duration");
	std::vector<PulseSegment> seq;
	seq.push_back({PulseSegment::Kind::drive, x / spec.fm_omega, spec.fm_omega, 0.0, 0.0});
	if (spec.inter_pulse_delay > 0)
		seq.push_back({PulseSegment::Kind::delay, spec.inter_pulse_delay, 0.0,
		               spec.delay_detuning, 0.0});
	seq.push_back({PulseSegment::Kind::drive, spec.ansatz_duration, spec.ansatz_omega, 0.0, theta});
	return seq;
}

namespace detail {

// One-pole low-pass on the amplitude channel, sampled for stepped evolution.
// Detuning and phase switch instantaneously; only omega is filtered.
inline SampledWaveform smoothed_waveform(const std::vector<PulseSegment>& seq,
                                         const CircuitSpec& spec, const RegisterGeometry& geometry)
{
	const double h = 0.5 * spec.integration_dt;
	const double tau = 1.0 / spec.modulation_bandwidth;
	double total = 0;
	for (const auto& s : seq)
		total += s.duration;
	const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / spec.integration_dt)));
	const double spacing = total / (2.0 * steps);

	SampledWaveform wf;
	wf.sample_spacing = spacing;
	wf.hamiltonians.reserve(2 * steps + 1);
	double omega_state = 0;
	std::size_t seg = 0;
	double seg_end = seq.empty() ? 0 : seq[0].duration;
	double prev_t = 0;
	for (std::size_t k = 0; k <= 2 * steps; ++k) {
		const double t = k * spacing;
		while (seg + 1 < seq.size() && t > seg_end + 1e-15) {
			seg_end += seq[seg + 1].duration;
			++seg;
		}
		const auto& s = seq[seg];
		omega_state = s.omega + (omega_state - s.omega) * std::exp(-(t - prev_t) / tau);
		prev_t = t;
		DriveSample d{omega_state, s.delta + spec.delta_offset, s.phi};
		wf.hamiltonians.push_back(build_hamiltonian(d, geometry));
	}
	return wf;
}

} // namespace detail

inline StateVector run_sequence(const std::vector<PulseSegment>& seq, const CircuitSpec& spec,
                                const RegisterGeometry& geometry)
{
	StateVector psi = StateVector::ground(geometry.n_atoms());
	if (seq.empty())
		return psi;
	if (spec.modulation == Modulation::smoothed)
		return evolve_stepped(psi, detail::smoothed_waveform(seq, spec, geometry));
	for (const auto& s : seq) {
		DriveSample d{s.omega, s.delta + spec.delta_offset, s.phi};
		psi = evolve_constant(psi, build_hamiltonian(d, geometry), s.duration);
	}
	return psi;
}

inline StateVector circuit_state(double x, double theta, const CircuitSpec& spec,
                                 const RegisterGeometry& geometry)
{
	return run_sequence(build_sequence(x, theta, spec), spec, geometry);
}

// shots = 0 requests the exact (infinite-shot) expectation value.
inline MagnetizationEstimate run_circuit(double x, double theta, const CircuitSpec& spec,
                                         const RegisterGeometry& geometry, long shots = 0,
                                         std::uint64_t seed = 0)
{
	const StateVector psi = circuit_state(x, theta, spec, geometry);
	const Matrix obs = total_magnetization_op(geometry.n_atoms());
	if (shots == 0) {
		MagnetizationEstimate est;
		est.value = expectation(psi, obs);
		est.exact = true;
		return est;
	}
	return magnetization_estimate(sample(psi, shots, seed));
}

// ---------------------------------------------------------------------------
// Experiment planning: the unique (x_eval, theta) pairs needed for the
// aGPSR derivatives over the collocation grid, the boundary value and the
// extra extremization points. Coincident evaluations are deduplicated; in
// the reference problem the boundary point is itself a shifted value.

struct PlanEntry {
	double x_eval = 0;
	double theta = 0;
	std::string role; // collocation | shift | boundary | qel
	bool serves_boundary = false;
};

struct SequencePlan {
	std::vector<PlanEntry> entries;

	std::size_t size() const { return entries.size(); }

	std::size_t count_for_theta(double theta, double tol = 1e-9) const
	{
		std::size_t c = 0;
		for (const auto& e : entries)
			if (std::abs(e.theta - theta) < tol)
				++c;
		return c;
	}
};

struct PlanRequest {
	std::vector<double> collocation;
	double boundary_x = 0;
	std::vector<double> theta_grid;
	std::vector<double> shifts;
	std::vector<double> qel_extra_points;
	double qel_theta = 0;
	double dedup_tolerance = 5e-3;
};

inline SequencePlan plan_experiment(const PlanRequest& req)
{
	if (req.collocation.empty() || req.theta_grid.empty() || req.shifts.empty())
		throw std::invalid_argument("plan_experiment: grids must be non-empty");
	auto coll = req.collocation;
	auto thetas = req.theta_grid;
	auto extras = req.qel_extra_points;
	std::sort(coll.begin(), coll.end());
	std::sort(thetas.begin(), thetas.end());
	std::sort(extras.begin(), extras.end());

	SequencePlan plan;
	auto find_entry = [&](double x, double theta) -> PlanEntry* {
		for (auto& e : plan.entries)
			if (std::abs(e.theta - theta) < 1e-9 && std::abs(e.x_eval - x) <= req.dedup_tolerance)
				return &e;
		return nullptr;
	};
	auto add = [&](double x, double theta, const std::string& role) {
		if (PlanEntry* e = find_entry(x, theta))
			return e;
		plan.entries.push_back({x, theta, role, false});
		return &plan.entries.back();
	};

	for (double theta : thetas) {
		for (double x : coll)
			for (double s : req.shifts) {
				add(x + s, theta, "shift");
				add(x - s, theta, "shift");
			}
		if (PlanEntry* e = find_entry(req.boundary_x, theta))
			e->serves_boundary = true;
		else
			add(req.boundary_x, theta, "boundary")->serves_boundary = true;
	}
	for (double x : extras)
		for (double s : req.shifts) {
			add(x + s, req.qel_theta, "qel");
			add(x - s, req.qel_theta, "qel");
		}

	std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
		if (a.theta != b.theta)
			return a.theta < b.theta;
		return a.x_eval < b.x_eval;
	});
	return plan;
}

inline nlohmann::json plan_to_json(const SequencePlan& plan)
{
	nlohmann::json arr = nlohmann::json::array();
	for (const auto& e : plan.entries)
		arr.push_back({{"x", e.x_eval},
		               {"theta", e.theta},
		               {"role", e.role},
		               {"serves_boundary", e.serves_boundary}});
	return {{"sequences", plan.size()}, {"entries", arr}};
}

inline SequencePlan plan_from_json(const nlohmann::json& j)
{
	SequencePlan plan;
	for (const auto& e : j.at("entries"))
		plan.entries.push_back({e.at("x").get<double>(), e.at("theta").get<double>(),
		                        e.at("role").get<std::string>(),
		                        e.value("serves_boundary", false)});
	return plan;
}

} // namespace rydqel
