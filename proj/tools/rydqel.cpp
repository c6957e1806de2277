// Command-line driver for the closed-loop analog DQC/QEL pipeline.
//
//   rydqel plan      --problem problems/paper.json --out out/
//   rydqel run       --problem problems/paper.json --mode sampled --seed 1 --out out/
//   rydqel derive    --problem problems/paper.json --x 4.757 --theta 2.79
//   rydqel calibrate --problem problems/paper.json --data data.csv --out out/
//   rydqel report    --out out/

#include <rydqel/pipeline.hpp>
#include <rydqel/reporting.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonOpts {
	std::string problem_path;
	std::string mode = "exact";
	long shots = 0;
	int copies = 0;
	std::uint64_t seed = 0;
	int jobs = 1;
	std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_problem = true)
{
	auto* p = cmd->add_option("--problem", o.problem_path, "problem definition (JSON)");
	if (needs_problem)
		p->required();
	cmd->add_option("--mode", o.mode, "exact | sampled")
	    ->check(CLI::IsMember({"exact", "sampled"}));
	cmd->add_option("--shots", o.shots, "shots per copy per sequence (sampled mode)");
	cmd->add_option("--copies", o.copies, "multiplex copies to aggregate");
	cmd->add_option("--seed", o.seed, "master seed");
	cmd->add_option("--jobs", o.jobs, "worker threads for sequence execution");
	cmd->add_option("--out", o.out_dir, "output directory");
}

rydqel::RunConfig make_run_config(const CommonOpts& o)
{
	rydqel::RunConfig cfg;
	cfg.mode = o.mode == "sampled" ? rydqel::RunMode::sampled : rydqel::RunMode::exact;
	cfg.shots = o.shots;
	cfg.copies = o.copies;
	cfg.seed = o.seed;
	cfg.jobs = o.jobs;
	cfg.out_dir = o.out_dir;
	return cfg;
}

std::map<rydqel::DataKey, rydqel::MagnetizationEstimate> load_data_csv(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw std::runtime_error("cannot open data file: " + path);
	std::map<rydqel::DataKey, rydqel::MagnetizationEstimate> data;
	std::string line;
	bool header_seen = false;
	while (std::getline(in, line)) {
		if (line.empty() || line[0] == '#')
			continue;
		if (!header_seen) {
			if (line.rfind("x,theta,value,std_error", 0) != 0)
				throw std::runtime_error("data file: expected header x,theta,value,std_error[,shots]");
			header_seen = true;
			continue;
		}
		std::istringstream ss(line);
		double x, theta;
		rydqel::MagnetizationEstimate est;
		char comma;
		ss >> x >> comma >> theta >> comma >> est.value >> comma >> est.std_error;
		if (ss >> comma)
			ss >> est.shots;
		if (!comma)
			throw std::runtime_error("data file: malformed row: " + line);
		data[{x, theta}] = est;
	}
	if (data.empty())
		throw std::runtime_error("data file: no rows");
	return data;
}

int cmd_plan(const CommonOpts& o)
{
	const auto problem = rydqel::load_problem(o.problem_path);
	const auto plan = rydqel::plan_experiment(problem.plan_request());
	const auto hash = rydqel::config_hash(problem, make_run_config(o));
	rydqel::write_plan(plan, o.out_dir, hash);
	std::cout << "sequences: " << plan.size() << "\n";
	for (double theta : problem.theta_grid)
		std::cout << "  theta " << theta << ": " << plan.count_for_theta(theta) << "\n";
	return 0;
}

int cmd_run(const CommonOpts& o)
{
	const auto problem = rydqel::load_problem(o.problem_path);
	const auto cfg = make_run_config(o);
	const auto hash = rydqel::config_hash(problem, cfg);

	rydqel::PlanResults cached;
	const bool have_cache = rydqel::load_cached_results(o.out_dir, hash, cached);
	if (have_cache)
		std::cout << "reusing cached sequence results (" << hash << ")\n";
	const auto run = rydqel::run_pipeline(problem, cfg, have_cache ? &cached : nullptr);

	rydqel::write_plan(run.plan, o.out_dir, hash);
	rydqel::write_results_csv(run.results, o.out_dir, hash);
	rydqel::write_derivatives_csv(run, o.out_dir, hash);
	rydqel::write_fig2_csv(run, problem, o.out_dir, hash);
	rydqel::write_loss_csv(run, o.out_dir, hash);
	rydqel::write_fig3b_csv(run, problem, o.out_dir, hash);
	rydqel::write_baseline_csv(run, problem, o.out_dir, hash);
	rydqel::write_summary(run, problem, o.out_dir, hash);

	std::cout << "sequences: " << run.plan.size() << "\n"
	          << "theta_opt: " << run.theta_opt << "\n"
	          << "x_opt: " << run.extremum.x_opt << "\n"
	          << "x_bar_analytic: " << run.analytic.x << "\n"
	          << "shots_used: " << run.results.shots_used << "\n";
	return 0;
}

int cmd_derive(const CommonOpts& o, double x, double theta)
{
	const auto problem = rydqel::load_problem(o.problem_path);
	const auto cfg = make_run_config(o);
	const auto gaps = problem.resolved_effective_gaps();
	const auto shifts = rydqel::ShiftSet::of(problem.shifts);
	const auto copy = problem.copy_geometry();
	long stream = 0;
	auto evaluator = [&](double xe) {
		const long shots = cfg.mode == rydqel::RunMode::exact
		                       ? 0
		                       : (cfg.shots > 0 ? cfg.shots : problem.sampling.shots);
		return rydqel::run_circuit(xe, theta, problem.circuit, copy, shots,
		                           rydqel::derive_seed(cfg.seed, xe, theta, stream++));
	};
	const auto d = rydqel::agpsr_derivative(evaluator, x, gaps, shifts);
	const auto scaled = rydqel::scale_derivative(d, problem.scaling);
	std::cout << "x: " << x << "\ntheta: " << theta << "\n"
	          << "d_magnetization/dx: " << d.value << " +- " << d.std_error << "\n"
	          << "d_model/dx: " << scaled.value << " +- " << scaled.std_error << "\n"
	          << "condition_number: " << d.condition_number << "\n";
	return 0;
}

int cmd_calibrate(const CommonOpts& o, const std::string& data_path, double lo, double hi)
{
	const auto problem = rydqel::load_problem(o.problem_path);
	const auto data = load_data_csv(data_path);
	rydqel::CalibrationOptions opt;
	opt.search_lo = lo;
	opt.search_hi = hi;
	const auto result =
	    rydqel::fit_detuning_offset(data, problem.circuit, problem.copy_geometry(), opt);

	const auto hash = rydqel::config_hash(problem, make_run_config(o));
	auto scan = rydqel::open_output(o.out_dir, "calibration_scan.csv", hash);
	scan << "delta_offset,weighted_rmsd\n";
	for (const auto& [d, v] : result.scan)
		scan << d << ',' << v << "\n";
	std::ofstream out(std::filesystem::path(o.out_dir) / "calibration.json");
	out << rydqel::calibration_to_json(result).dump(2) << "\n";

	std::cout << "delta_offset: " << result.delta_offset << " rad/us ("
	          << result.delta_offset / (2 * rydqel::kPi) * 1e3 << " * 2pi kHz)\n"
	          << "weighted_rmsd: " << result.weighted_rmsd_before << " -> "
	          << result.weighted_rmsd_after << "\n";
	if (result.exceeds_hardware_spec)
		std::cout << "warning: offset exceeds the expected hardware detuning accuracy\n";
	return 0;
}

int cmd_report(const std::string& out_dir)
{
	std::ifstream in(std::filesystem::path(out_dir) / "summary.json");
	if (!in)
		throw std::runtime_error("no summary.json in " + out_dir + "; run `rydqel run` first");
	nlohmann::json s;
	in >> s;
	const double xo = s.at("x_opt").get<double>();
	const double xb = s.at("x_bar_analytic").get<double>();
	std::cout << "problem:        " << s.value("problem", std::string{}) << "\n"
	          << "config hash:    " << s.value("config_hash", std::string{}) << "\n"
	          << "sequences:      " << s.at("sequences").get<std::size_t>() << "\n"
	          << "shots used:     " << s.at("shots_used").get<long>() << "\n"
	          << "theta_opt:      " << s.at("theta_opt").get<double>() << "\n"
	          << "x_opt:          " << xo << "\n"
	          << "x_bar analytic: " << xb << "\n"
	          << "|x_opt - x_bar|: " << std::abs(xo - xb) << "\n";
	return 0;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"analog DQC/QEL pipeline emulator"};
	app.require_subcommand(1);

	CommonOpts o;
	double x = 0, theta = 0;
	std::string data_path;
	double cal_lo = -3.0, cal_hi = 1.0;
	std::string report_dir = "out";

	auto* plan = app.add_subcommand("plan", "write the deduplicated sequence plan");
	add_common(plan, o);
	auto* run = app.add_subcommand("run", "execute the full closed-loop pipeline");
	add_common(run, o);
	auto* derive = app.add_subcommand("derive", "single-point aGPSR derivative");
	add_common(derive, o);
	derive->add_option("--x", x, "feature value")->required();
	derive->add_option("--theta", theta, "ansatz phase")->required();
	auto* calibrate = app.add_subcommand("calibrate", "fit a constant detuning offset to data");
	add_common(calibrate, o);
	calibrate->add_option("--data", data_path, "measured magnetization CSV")->required();
	calibrate->add_option("--search-lo", cal_lo, "scan lower bound (rad/us)");
	calibrate->add_option("--search-hi", cal_hi, "scan upper bound (rad/us)");
	auto* report = app.add_subcommand("report", "summarize a finished run");
	report->add_option("--out", report_dir, "output directory of the run");

	CLI11_PARSE(app, argc, argv);

	try {
		if (plan->parsed())
			return cmd_plan(o);
		if (run->parsed())
			return cmd_run(o);
		if (derive->parsed())
			return cmd_derive(o, x, theta);
		if (calibrate->parsed())
			return cmd_calibrate(o, data_path, cal_lo, cal_hi);
		if (report->parsed())
			return cmd_report(report_dir);
	} catch (const std::exception& e) {
		std::cerr << "error [" << app.get_subcommands().front()->get_name() << "]: " << e.what()
		          << "\n";
		return 1;
	}
	return 0;
}
