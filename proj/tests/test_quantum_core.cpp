#include <rydqel/quantum_core.hpp>
#include <rydqel/rydberg_model.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace rydqel;

namespace {

// Independent fine-step integrator used as an oracle against the exact
// exponential (plain midpoint-free RK4 on a constant H).
StateVector rk4_constant(const StateVector& s, const Matrix& h, double t, int steps)
{
	Vector psi = s.amplitudes;
	const double dt = t / steps;
	const Complex mi(0, -1);
	for (int k = 0; k < steps; ++k) {
		Vector k1 = mi * (h * psi);
		Vector k2 = mi * (h * (psi + 0.5 * dt * k1));
		Vector k3 = mi * (h * (psi + 0.5 * dt * k2));
		Vector k4 = mi * (h * (psi + dt * k3));
		psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
	}
	StateVector out = s;
	out.amplitudes = psi;
	return out;
}

SampledWaveform constant_waveform(const Matrix& h, double total, double dt)
{
	SampledWaveform wf;
	const std::size_t steps = static_cast<std::size_t>(std::round(total / dt));
	wf.sample_spacing = total / (2.0 * steps);
	wf.hamiltonians.assign(2 * steps + 1, h);
	return wf;
}

} // namespace

TEST_CASE("embedding places single-qubit operators at the right site")
{
	CHECK((embed_single_qubit(sigma_z(), 0, 1) - sigma_z()).cwiseAbs().maxCoeff() == 0.0);

	// site-0 flip: |00> -> |10> under the leftmost-qubit-first ordering
	StateVector s = StateVector::ground(2);
	Vector flipped = embed_single_qubit(sigma_x(), 0, 2) * s.amplitudes;
	CHECK(std::abs(flipped(2) - 1.0) < 1e-15);
	CHECK(std::abs(flipped(0)) + std::abs(flipped(1)) + std::abs(flipped(3)) < 1e-15);

	// eigenvalues of sigma_z x I + I x sigma_z, via direct diagonalization
	Matrix zz = embed_single_qubit(sigma_z(), 0, 2) + embed_single_qubit(sigma_z(), 1, 2);
	Eigen::SelfAdjointEigenSolver<Matrix> es(zz);
	std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
	std::sort(ev.begin(), ev.end());
	CHECK(ev[0] == Catch::Approx(-2.0));
	CHECK(ev[1] == Catch::Approx(0.0).margin(1e-14));
	CHECK(ev[2] == Catch::Approx(0.0).margin(1e-14));
	CHECK(ev[3] == Catch::Approx(2.0));

	CHECK_THROWS_AS(embed_single_qubit(sigma_z(), 2, 2), std::invalid_argument);
}

TEST_CASE("evolve_constant basics")
{
	StateVector s = StateVector::ground(1);
	Matrix h = 4.5 * sigma_x(); // Omega = 9

	SECTION("zero duration is the identity")
	{
		auto out = evolve_constant(s, h, 0.0);
		CHECK((out.amplitudes - s.amplitudes).norm() < 1e-15);
	}
	SECTION("pi pulse maps |0> to -i|1>")
	{
		auto out = evolve_constant(s, h, kPi / 9.0);
		CHECK(std::abs(out.amplitudes(0)) < 1e-12);
		CHECK(std::abs(out.amplitudes(1) - Complex(0, -1)) < 1e-12);
	}
	SECTION("composition over durations")
	{
		auto a = evolve_constant(evolve_constant(s, h, 0.31), h, 0.57);
		auto b = evolve_constant(s, h, 0.88);
		CHECK((a.amplitudes - b.amplitudes).norm() < 1e-10);
	}
	SECTION("dimension mismatch")
	{
		CHECK_THROWS_AS(evolve_constant(StateVector::ground(2), h, 0.1), std::invalid_argument);
	}
}

TEST_CASE("exact exponential matches an independent 4th-order integrator")
{
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	Matrix h = build_hamiltonian({9.0, 0.0, 0.0}, geom);
	StateVector s = StateVector::ground(2);
	auto exact = evolve_constant(s, h, 0.5);
	CHECK(std::abs(exact.norm() - 1.0) < 1e-12);
	auto stepped = rk4_constant(s, h, 0.5, 500);
	CHECK((exact.amplitudes - stepped.amplitudes).norm() < 1e-8);
}

TEST_CASE("evolve_stepped")
{
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	Matrix h = build_hamiltonian({9.0, 0.0, 0.0}, geom);
	StateVector s = StateVector::ground(2);

	SECTION("constant waveform agrees with evolve_constant at dt = 1e-3")
	{
		auto a = evolve_stepped(s, constant_waveform(h, 0.5, 1e-3));
		auto b = evolve_constant(s, h, 0.5);
		CHECK((a.amplitudes - b.amplitudes).norm() < 1e-8);
	}
	SECTION("zero drive is the identity")
	{
		Matrix h0 = build_hamiltonian({0.0, 0.0, 0.0}, RegisterGeometry::pair(1e6));
		auto out = evolve_stepped(s, constant_waveform(h0, 0.5, 1e-3));
		CHECK((out.amplitudes - s.amplitudes).norm() < 1e-10);
	}
	SECTION("4th-order convergence on a smooth time-dependent drive")
	{
		auto make = [&](double dt) {
			const double total = 0.5;
			const std::size_t steps = static_cast<std::size_t>(std::round(total / dt));
			SampledWaveform wf;
			wf.sample_spacing = total / (2.0 * steps);
			for (std::size_t k = 0; k <= 2 * steps; ++k) {
				const double t = k * wf.sample_spacing;
				wf.hamiltonians.push_back(
				    build_hamiltonian({9.0 * (1 + 0.5 * std::sin(8 * t)), 2.0 * std::cos(5 * t), 0.3}, geom));
			}
			return evolve_stepped(s, wf);
		};
		auto coarse = make(4e-3);
		auto fine = make(2e-3);
		auto reference = make(2.5e-4);
		const double e_coarse = (coarse.amplitudes - reference.amplitudes).norm();
		const double e_fine = (fine.amplitudes - reference.amplitudes).norm();
		CHECK(e_coarse / e_fine > 12.0);
		CHECK(e_coarse / e_fine < 20.0);
	}
}

TEST_CASE("unitarity is preserved across evolutions")
{
	RegisterGeometry geom = RegisterGeometry::pair(8.7);
	std::mt19937_64 rng(42);
	std::uniform_real_distribution<double> u(0.0, 2 * kPi);
	StateVector s = StateVector::ground(2);
	for (int i = 0; i < 20; ++i) {
		Matrix h = build_hamiltonian({u(rng), u(rng) - kPi, u(rng)}, geom);
		s = evolve_constant(s, h, 0.2);
		CHECK(std::abs(s.norm() - 1.0) < 1e-10);
	}
}

TEST_CASE("expectation values")
{
	Matrix zz = total_magnetization_op(2);
	StateVector ground = StateVector::ground(2);
	CHECK(expectation(ground, zz) == Catch::Approx(-2.0));

	StateVector uniform = ground;
	uniform.amplitudes.setConstant(0.5);
	CHECK(expectation(uniform, zz) == Catch::Approx(0.0).margin(1e-14));

	StateVector both = ground;
	both.amplitudes.setZero();
	both.amplitudes(3) = 1.0;
	CHECK(expectation(both, zz) == Catch::Approx(2.0));

	SECTION("linearity")
	{
		Matrix a = embed_single_qubit(sigma_x(), 0, 2);
		Matrix b = embed_single_qubit(sigma_y(), 1, 2);
		StateVector s = ground;
		s.amplitudes << Complex(0.5, 0.1), Complex(0.2, -0.3), Complex(0.4, 0.2), Complex(0.1, 0.0);
		s.amplitudes.normalize();
		const double lhs = expectation(s, 2.0 * a + 3.0 * b);
		const double rhs = 2.0 * expectation(s, a) + 3.0 * expectation(s, b);
		CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
	}
}
