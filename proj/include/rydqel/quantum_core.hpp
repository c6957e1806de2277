#pragma once

// Dense state-vector core for small (n <= 4) qubit registers:
// Hermitian operators, exact piecewise-constant evolution via
// eigendecomposition, RK4 stepped evolution for modulated drives,
// and expectation values.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace rydqel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;

// Convention: sigma_z|1> = +|1>, so N = (1 + sigma_z)/2 projects onto the
// Rydberg state and the ground register |0...0> has magnetization -n.
// Basis index: qubit 0 is the most significant bit (leftmost in bitstrings).
inline Matrix sigma_x()
{
	Matrix m(2, 2);
	m << 0, 1, 1, 0;
	return m;
}

inline Matrix sigma_y()
{
	Matrix m(2, 2);
	m << 0, Complex(0, 1), Complex(0, -1), 0;
	return m;
}

inline Matrix sigma_z()
{
	Matrix m(2, 2);
	m << -1, 0, 0, 1;
	return m;
}

// Rydberg occupation number (1 + sigma_z)/2 = |1><1|.
inline Matrix number_op()
{
	Matrix m = Matrix::Zero(2, 2);
	m(1, 1) = 1;
	return m;
}

struct StateVector {
	int n_qubits = 0;
	Vector amplitudes;

	static StateVector ground(int n)
	{
		StateVector s;
		s.n_qubits = n;
		s.amplitudes = Vector::Zero(std::size_t{1} << n);
		s.amplitudes(0) = 1.0;
		return s;
	}

	std::size_t dim() const { return amplitudes.size(); }
	double norm() const { return amplitudes.norm(); }
};

inline bool is_hermitian(const Matrix& m, double tol = 1e-12)
{
	return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// Tensor-product embedding of a 2x2 operator at `site` in an n-qubit register.
inline Matrix embed_single_qubit(const Matrix& op, int site, int n)
{
	if (op.rows() != 2 || op.cols() != 2)
		throw std::invalid_argument("embed_single_qubit: operator must be 2x2");
	if (site < 0 || site >= n)
		throw std::invalid_argument("embed_single_qubit: site out of range");
	Matrix out = Matrix::Identity(1, 1);
	for (int q = 0; q < n; ++q) {
		const Matrix& factor = (q == site) ? op : Matrix::Identity(2, 2);
		Matrix next(out.rows() * 2, out.cols() * 2);
		for (Eigen::Index i = 0; i < out.rows(); ++i)
			for (Eigen::Index j = 0; j < out.cols(); ++j)
				next.block(2 * i, 2 * j, 2, 2) = out(i, j) * factor;
		out = next;
	}
	return out;
}

// Sum of sigma_z over all qubits (the total magnetization observable).
inline Matrix total_magnetization_op(int n)
{
	const std::size_t d = std::size_t{1} << n;
	Matrix m = Matrix::Zero(d, d);
	for (int q = 0; q < n; ++q)
		m += embed_single_qubit(sigma_z(), q, n);
	return m;
}

// exp(-i H t)|psi> by Hermitian eigendecomposition. Exact for constant H.
inline StateVector evolve_constant(const StateVector& state, const Matrix& h, double duration)
{
	if (static_cast<std::size_t>(h.rows()) != state.dim() || h.rows() != h.cols())
		throw std::invalid_argument("evolve_constant: dimension mismatch");
	if (duration < 0)
		throw std::invalid_argument("evolve_constant: negative duration");
	Eigen::SelfAdjointEigenSolver<Matrix> es(h);
	Vector phases(h.rows());
	for (Eigen::Index k = 0; k < h.rows(); ++k)
		phases(k) = std::exp(Complex(0, -es.eigenvalues()(k) * duration));
	StateVector out = state;
	out.amplitudes = es.eigenvectors() * phases.cwiseProduct(es.eigenvectors().adjoint() * state.amplitudes);
	return out;
}

// Uniformly sampled drive for stepped integration. Samples are spaced
// `sample_spacing` apart; the integrator takes RK4 steps of twice that,
// so H is available exactly at step midpoints.
struct SampledWaveform {
	double sample_spacing = 0;
	std::vector<Matrix> hamiltonians; // one per sample, 2k+1 samples for k steps
};

inline StateVector evolve_stepped(const StateVector& state, const SampledWaveform& wf)
{
	if (wf.sample_spacing <= 0)
		throw std::invalid_argument("evolve_stepped: sample spacing must be positive");
	if (wf.hamiltonians.size() < 3 || wf.hamiltonians.size() % 2 == 0)
		throw std::invalid_argument("evolve_stepped: need 2k+1 samples");
	for (const auto& h : wf.hamiltonians)
		if (static_cast<std::size_t>(h.rows()) != state.dim())
			throw std::invalid_argument("evolve_stepped: dimension mismatch");

	const double dt = 2.0 * wf.sample_spacing;
	const Complex mi(0, -1);
	Vector psi = state.amplitudes;
	for (std::size_t s = 0; s + 2 < wf.hamiltonians.size(); s += 2) {
		const Matrix& h0 = wf.hamiltonians[s];
		const Matrix& hm = wf.hamiltonians[s + 1];
		const Matrix& h1 = wf.hamiltonians[s + 2];
		Vector k1 = mi * (h0 * psi);
		Vector k2 = mi * (hm * (psi + 0.5 * dt * k1));
		Vector k3 = mi * (hm * (psi + 0.5 * dt * k2));
		Vector k4 = mi * (h1 * (psi + dt * k3));
		psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
	}
	// RK4 is not exactly unitary; drift ~ dt^4 ||H||^5 T stays ~1e-6 for
	// microsecond sequences at dt = 1e-3. Anything worse means the step is
	// too coarse for the drive.
	const double drift = std::abs(psi.norm() - 1.0);
	if (drift > 1e-5)
		throw std::runtime_error("evolve_stepped: norm drift exceeds 1e-5, step too coarse");
	StateVector out = state;
	out.amplitudes = psi / psi.norm();
	return out;
}

inline double expectation(const StateVector& state, const Matrix& observable)
{
	if (static_cast<std::size_t>(observable.rows()) != state.dim())
		throw std::invalid_argument("expectation: dimension mismatch");
	const Complex v = state.amplitudes.dot(observable * state.amplitudes);
	return v.real();
}

} // namespace rydqel
