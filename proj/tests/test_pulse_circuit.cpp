#include <rydqel/pulse_circuit.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace rydqel;

namespace {

CircuitSpec paper_circuit()
{
	CircuitSpec spec;
	spec.ansatz_duration = 1.2;
	spec.inter_pulse_delay = 0.2;
	spec.delay_detuning = 11.5;
	return spec;
}

} // namespace

TEST_CASE("build_sequence layout")
{
	CircuitSpec spec = paper_circuit();
	auto seq = build_sequence(4.0, 2.79, spec);
	REQUIRE(seq.size() == 3);
	CHECK(seq[0].kind == PulseSegment::Kind::drive);
	CHECK(seq[0].duration == Catch::Approx(4.0 / 9.0));
	CHECK(seq[0].omega == 9.0);
	CHECK(seq[0].phi == 0.0);
	CHECK(seq[1].kind == PulseSegment::Kind::delay);
	CHECK(seq[1].duration == Catch::Approx(0.2));
	CHECK(seq[1].omega == 0.0);
	CHECK(seq[1].delta == Catch::Approx(11.5));
	CHECK(seq[2].kind == PulseSegment::Kind::drive);
	CHECK(seq[2].duration == Catch::Approx(1.2));
	CHECK(seq[2].phi == Catch::Approx(2.79));

	CircuitSpec plain;
	CHECK(build_sequence(4.0, 1.0, plain).size() == 2);

	CHECK_THROWS_AS(build_sequence(0.0, 1.0, spec), std::invalid_argument);
	CHECK_THROWS_AS(build_sequence(-1.0, 1.0, spec), std::invalid_argument);
	CHECK_THROWS_AS(build_sequence(50.0, 1.0, spec), std::invalid_argument);
	CHECK(spec.sequence_duration(9.0) == Catch::Approx(1.0 + 0.2 + 1.2));
}

TEST_CASE("circuit_state matches manual piecewise evolution")
{
	CircuitSpec spec = paper_circuit();
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	const double x = 4.757, theta = 2.79;

	StateVector manual = StateVector::ground(2);
	manual = evolve_constant(manual, build_hamiltonian({9.0, 0.0, 0.0}, geom), x / 9.0);
	manual = evolve_constant(manual, build_hamiltonian({0.0, 11.5, 0.0}, geom), 0.2);
	manual = evolve_constant(manual, build_hamiltonian({9.0, 0.0, theta}, geom), 1.2);

	auto out = circuit_state(x, theta, spec, geom);
	CHECK((out.amplitudes - manual.amplitudes).norm() < 1e-12);
}

TEST_CASE("theta periodicity of the circuit output")
{
	CircuitSpec spec = paper_circuit();
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	const double a = run_circuit(4.0, 1.3, spec, geom).value;
	const double b = run_circuit(4.0, 1.3 + 2 * kPi, spec, geom).value;
	CHECK(a == Catch::Approx(b).margin(1e-10));
}

TEST_CASE("delta_offset shifts the whole sequence")
{
	CircuitSpec spec = paper_circuit();
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	CircuitSpec shifted = spec;
	shifted.delta_offset = -1.0;
	const double a = run_circuit(4.0, 2.79, spec, geom).value;
	const double b = run_circuit(4.0, 2.79, shifted, geom).value;
	CHECK(std::abs(a - b) > 1e-3); // offset must actually change the physics
}

TEST_CASE("smoothed modulation converges to the ideal waveform at high bandwidth")
{
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	CircuitSpec ideal = paper_circuit();
	CircuitSpec smooth = ideal;
	smooth.modulation = Modulation::smoothed;
	smooth.modulation_bandwidth = 2e3;
	smooth.integration_dt = 2.5e-4;
	const double a = run_circuit(4.0, 2.79, ideal, geom).value;
	const double b = run_circuit(4.0, 2.79, smooth, geom).value;
	CHECK(a == Catch::Approx(b).margin(0.05));

	// lower bandwidth distorts the output more
	smooth.modulation_bandwidth = 20.0;
	smooth.integration_dt = 1e-3;
	const double c = run_circuit(4.0, 2.79, smooth, geom).value;
	CHECK(std::abs(a - c) > std::abs(a - b));
	CHECK(std::abs(a - c) > 1e-3);
}

TEST_CASE("run_circuit exact vs sampled")
{
	CircuitSpec spec = paper_circuit();
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	auto exact = run_circuit(4.0, 2.79, spec, geom);
	CHECK(exact.exact);
	CHECK(exact.shots == 0);
	CHECK(exact.std_error == 0.0);

	auto noisy = run_circuit(4.0, 2.79, spec, geom, 4000, 7);
	CHECK_FALSE(noisy.exact);
	CHECK(noisy.shots == 4000);
	CHECK(noisy.std_error > 0);
	CHECK(std::abs(noisy.value - exact.value) < 5 * noisy.std_error);

	auto again = run_circuit(4.0, 2.79, spec, geom, 4000, 7);
	CHECK(noisy.value == again.value); // seeded reproducibility
}

TEST_CASE("plan_experiment reproduces the reference sequence counts")
{
	PlanRequest req;
	req.collocation = {2.614, 3.328, 4.042, 4.757, 5.471, 6.185, 6.900, 7.614};
	req.boundary_x = 6.516;
	req.theta_grid = {0.70, 1.40, 2.09, 2.79, 3.49, 4.19, 4.88, 5.58, 6.28};
	req.shifts = {0.90, 2.47};
	req.qel_extra_points = {4.519, 4.995, 5.233, 5.709, 5.947};
	req.qel_theta = 2.79;
	req.dedup_tolerance = 5e-3;

	auto plan = plan_experiment(req);
	CHECK(plan.size() == 308);
	CHECK(plan.count_for_theta(2.79) == 52);
	for (double theta : req.theta_grid)
		if (std::abs(theta - 2.79) > 1e-9)
			CHECK(plan.count_for_theta(theta) == 32);

	SECTION("the boundary rides on a coincident shifted evaluation")
	{
		for (double theta : req.theta_grid) {
			int boundary_entries = 0;
			for (const auto& e : plan.entries)
				if (std::abs(e.theta - theta) < 1e-9 && e.serves_boundary) {
					++boundary_entries;
					CHECK(e.role == "shift"); // 4.042 + 2.47 = 6.512 ~ 6.516
					CHECK(e.x_eval == Catch::Approx(6.512));
				}
			CHECK(boundary_entries == 1);
		}
	}
	SECTION("a tighter dedup tolerance no longer merges the boundary")
	{
		req.dedup_tolerance = 1e-3;
		CHECK(plan_experiment(req).size() == 317);
	}
	SECTION("entries are sorted and unique beyond the tolerance")
	{
		for (std::size_t i = 1; i < plan.entries.size(); ++i) {
			const auto& a = plan.entries[i - 1];
			const auto& b = plan.entries[i];
			const bool same_theta = std::abs(a.theta - b.theta) < 1e-9;
			CHECK((!same_theta || b.x_eval - a.x_eval > req.dedup_tolerance));
			CHECK(a.theta <= b.theta + 1e-12);
		}
	}
	SECTION("JSON round trip")
	{
		auto back = plan_from_json(plan_to_json(plan));
		REQUIRE(back.size() == plan.size());
		CHECK(back.entries[10].x_eval == plan.entries[10].x_eval);
		CHECK(back.entries[10].role == plan.entries[10].role);
	}
	SECTION("empty grids are rejected")
	{
		PlanRequest bad = req;
		bad.theta_grid.clear();
		CHECK_THROWS_AS(plan_experiment(bad), std::invalid_argument);
	}
}
