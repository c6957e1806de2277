#pragma once

// CSV / JSON export of run artifacts. Every file carries a provenance
// header with the config hash. Figure-style tables mirror the run summary:
// per-theta function/derivative curves, the loss table and the trained
// curve with its extremum.

#include "pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace rydqel {

inline std::ofstream open_output(const std::string& dir, const std::string& name,
                                 const std::string& hash)
{
	std::filesystem::create_directories(dir);
	std::ofstream out(std::filesystem::path(dir) / name);
	if (!out)
		throw std::runtime_error("cannot write output file: " + name);
	out << "# config_hash=" << hash << "\n";
	out << std::setprecision(12);
	return out;
}

inline void write_plan(const SequencePlan& plan, const std::string& dir, const std::string& hash)
{
	std::filesystem::create_directories(dir);
	nlohmann::json j = plan_to_json(plan);
	j["config_hash"] = hash;
	std::ofstream out(std::filesystem::path(dir) / "plan.json");
	out << j.dump(2) << "\n";
}

inline void write_results_csv(const PlanResults& results, const std::string& dir,
                              const std::string& hash)
{
	auto out = open_output(dir, "results.csv", hash);
	out << "x,theta,value,std_error,shots\n";
	for (const auto& [theta, by_x] : results.by_theta)
		for (const auto& [x, est] : by_x)
			out << x << ',' << theta << ',' << est.value << ',' << est.std_error << ','
			    << est.shots << "\n";
}

inline bool load_cached_results(const std::string& dir, const std::string& hash, PlanResults& out)
{
	std::ifstream in(std::filesystem::path(dir) / "results.csv");
	if (!in)
		return false;
	std::string line;
	if (!std::getline(in, line) || line != "# config_hash=" + hash)
		return false;
	std::getline(in, line); // column header
	out = PlanResults{};
	while (std::getline(in, line)) {
		if (line.empty())
			continue;
		std::istringstream ss(line);
		MagnetizationEstimate est;
		double x, theta;
		char comma;
		ss >> x >> comma >> theta >> comma >> est.value >> comma >> est.std_error >> comma >>
		    est.shots;
		if (!ss)
			return false;
		est.exact = (est.shots == 0);
		out.by_theta[theta][x] = est;
		out.shots_used += est.shots;
	}
	return !out.by_theta.empty();
}

inline void write_derivatives_csv(const RunOutcome& run, const std::string& dir,
                                  const std::string& hash)
{
	auto out = open_output(dir, "derivatives.csv", hash);
	out << "x,theta,derivative,std_error";
	const std::size_t nshift = run.gaps_used.size();
	for (std::size_t k = 1; k <= nshift; ++k)
		out << ",shift_" << k << "_plus,shift_" << k << "_minus";
	out << "\n";
	for (const auto& [theta, derivs] : run.derivatives_by_theta)
		for (const auto& [x, d] : derivs) {
			out << x << ',' << theta << ',' << d.value << ',' << d.std_error;
			for (std::size_t k = 0; k + 1 < d.evaluations.size(); k += 2)
				out << ',' << d.evaluations[k].estimate.value << ','
				    << d.evaluations[k + 1].estimate.value;
			out << "\n";
		}
}

// fig2-style table: function and derivative per theta over the derivative grid.
inline void write_fig2_csv(const RunOutcome& run, const ProblemConfig& p, const std::string& dir,
                           const std::string& hash)
{
	auto out = open_output(dir, "fig2.csv", hash);
	out << "x,f,df,theta\n";
	for (const auto& [theta, derivs] : run.derivatives_by_theta) {
		std::vector<double> grid;
		for (const auto& [x, d] : derivs)
			grid.push_back(x);
		const auto vals = values_at_grid(grid, run.scaled_by_theta.at(theta),
		                                 p.value_lookup_tolerance);
		for (const auto& [x, d] : derivs)
			out << x << ',' << vals.at(x).value << ',' << d.value << ',' << theta << "\n";
	}
}

// fig3a-style table: loss decomposition per theta.
inline void write_loss_csv(const RunOutcome& run, const std::string& dir, const std::string& hash)
{
	auto out = open_output(dir, "fig3a_loss.csv", hash);
	out << "theta,sqrt_l_d,l_b,total\n";
	for (const auto& r : run.losses)
		out << r.theta << ',' << std::sqrt(r.l_d) << ',' << r.l_b << ',' << r.total << "\n";
}

// fig3b-style table: trained curve and derivative on the extremization grid.
inline void write_fig3b_csv(const RunOutcome& run, const ProblemConfig& p, const std::string& dir,
                            const std::string& hash)
{
	auto out = open_output(dir, "fig3b.csv", hash);
	out << "x,f,df\n";
	const auto& derivs = run.derivatives_by_theta.at(p.qel_theta);
	std::vector<double> grid;
	for (const auto& [x, d] : derivs)
		grid.push_back(x);
	const auto vals =
	    values_at_grid(grid, run.scaled_by_theta.at(p.qel_theta), p.value_lookup_tolerance);
	for (const auto& [x, d] : derivs)
		out << x << ',' << vals.at(x).value << ',' << d.value << "\n";
}

inline nlohmann::json run_summary(const RunOutcome& run, const ProblemConfig& p,
                                  const std::string& hash)
{
	return {{"config_hash", hash},
	        {"problem", p.name},
	        {"theta_opt", run.theta_opt},
	        {"qel_theta", p.qel_theta},
	        {"x_opt", run.extremum.x_opt},
	        {"f_at_opt", run.extremum.f_at_opt},
	        {"x_bar_analytic", run.analytic.x},
	        {"f_analytic_min", run.analytic.value},
	        {"sequences", run.plan.size()},
	        {"shots_used", run.results.shots_used},
	        {"qel_new_evaluations", run.qel_new_evaluations},
	        {"effective_gaps", run.gaps_used},
	        {"extremization", extremization_to_json(run.extremum)}};
}

inline void write_summary(const RunOutcome& run, const ProblemConfig& p, const std::string& dir,
                          const std::string& hash)
{
	std::filesystem::create_directories(dir);
	std::ofstream out(std::filesystem::path(dir) / "summary.json");
	out << run_summary(run, p, hash).dump(2) << "\n";
}

// Per-theta smoothing baseline over the measured sweep: {x, f_smoothed,
// df_smoothed} in model units.
inline void write_baseline_csv(const RunOutcome& run, const ProblemConfig& p,
                               const std::string& dir, const std::string& hash)
{
	auto out = open_output(dir, "baseline.csv", hash);
	out << "x,theta,f_smoothed,df_smoothed\n";
	for (const auto& [theta, by_x] : run.scaled_by_theta) {
		std::vector<double> xs, ys, ws;
		for (const auto& [x, est] : by_x) {
			xs.push_back(x);
			ys.push_back(est.value);
			ws.push_back(est.std_error > 0 ? 1.0 / (est.std_error * est.std_error) : 1.0);
		}
		SmootherConfig cfg = p.smoother;
		bool any_noise = false;
		for (const auto& [x, est] : by_x)
			any_noise |= est.std_error > 0;
		if (any_noise)
			cfg.weights = ws;
		const auto z = whittaker_smooth(ys, cfg);
		const auto dz = smoothed_derivative(xs, ys, cfg);
		for (std::size_t i = 0; i < xs.size(); ++i)
			out << xs[i] << ',' << theta << ',' << z[i] << ',' << dz[i] << "\n";
	}
}

} // namespace rydqel
