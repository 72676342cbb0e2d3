#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "toricfloer/errors.hpp"
#include "toricfloer/novikov.hpp"
#include "toricfloer/toric.hpp"

namespace toricfloer {

/// Symmetric n x n matrix over the Novikov ring.
class QuadraticForm
{
public:
	explicit QuadraticForm(std::size_t n = 0) : n_(n), entries_(n * n) {}

	std::size_t dim() const { return n_; }

	const NovikovElement& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

	/// Sets both (i,j) and (j,i).
	void set(std::size_t i, std::size_t j, const NovikovElement& v)
	{
		entries_[i * n_ + j] = v;
		entries_[j * n_ + i] = v;
	}

	bool is_symmetric() const
	{
		for (std::size_t i = 0; i < n_; ++i)
			for (std::size_t j = 0; j < i; ++j)
				if ((*this)(i, j) != (*this)(j, i))
					return false;
		return true;
	}

	/// Every nonzero term carries q^1.
	bool is_q_homogeneous() const
	{
		for (const auto& e : entries_)
			if (!e.q_homogeneous(1))
				return false;
		return true;
	}

	bool has_nonzero_offdiagonal() const
	{
		for (std::size_t i = 0; i < n_; ++i)
			for (std::size_t j = 0; j < i; ++j)
				if (!(*this)(i, j).is_zero())
					return true;
		return false;
	}

	/// Copy with off-diagonal entries scaled by `factor` (display variant).
	QuadraticForm offdiagonal_scaled(const Rational& factor) const
	{
		QuadraticForm r = *this;
		for (std::size_t i = 0; i < n_; ++i)
			for (std::size_t j = 0; j < i; ++j)
				r.set(i, j, factor * (*this)(i, j));
		return r;
	}

	static QuadraticForm zero(std::size_t n) { return QuadraticForm(n); }

	friend bool operator==(const QuadraticForm&, const QuadraticForm&) = default;

private:
	std::size_t n_;
	std::vector<NovikovElement> entries_;
};

using ComplexVector = std::vector<std::complex<double>>;

/// Theta = u + i*2pi*holonomy (holonomy in turns).
inline ComplexVector theta_of(const Fiber& f)
{
	ComplexVector t;
	for (std::size_t i = 0; i < f.u.size(); ++i) {
		double im = f.holonomy ? 2 * std::numbers::pi * to_double((*f.holonomy)[i]) : 0.0;
		t.emplace_back(to_double(f.u[i]), im);
	}
	return t;
}

/**
 * Partial derivative of W(theta) = sum_k exp(-(<theta, v_k> - lambda_k))
 * along the multi-index `idx` (0-based coordinates; empty gives W itself):
 * (-1)^m sum_k v_{k,i1}...v_{k,im} exp(-l_k(theta)).
 */
inline std::complex<double> eval_W_derivative(const ToricFano& x, std::span<const std::complex<double>> theta,
                                              std::span<const std::size_t> idx)
{
	if (theta.size() != x.dim())
		throw DimensionMismatch("theta has wrong length");
	for (auto i : idx)
		if (i >= x.dim())
			throw DimensionMismatch("derivative index out of range");
	std::complex<double> sum = 0;
	for (const auto& f : x.facets()) {
		std::complex<double> ell = -to_double(f.offset);
		for (std::size_t i = 0; i < x.dim(); ++i)
			ell += theta[i] * static_cast<double>(f.normal[i]);
		double coeff = 1;
		for (auto i : idx)
			coeff *= static_cast<double>(f.normal[i]);
		if (coeff != 0)
			sum += coeff * std::exp(-ell);
	}
	return (idx.size() % 2 ? -1.0 : 1.0) * sum;
}

inline double eval_W_derivative(const ToricFano& x, std::span<const double> u, std::span<const std::size_t> idx)
{
	ComplexVector theta(u.begin(), u.end());
	return eval_W_derivative(x, std::span<const std::complex<double>>(theta), idx).real();
}

/// Numeric Hessian of W at a real point.
inline Eigen::MatrixXd numeric_hessian(const ToricFano& x, std::span<const double> u)
{
	const std::size_t n = x.dim();
	Eigen::MatrixXd h(n, n);
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j < n; ++j) {
			std::size_t idx[2] = {i, j};
			h(i, j) = eval_W_derivative(x, u, idx);
		}
	return h;
}

/// Holonomy-twisted balance: every area class satisfies
/// sum_j exp(-2 pi i <h, v_j>) v_j = 0 up to `tol`.
inline bool is_balanced_with_holonomy(const ToricFano& x, const Fiber& f, double tol = 1e-12)
{
	auto classes = area_partition(disc_areas(x, f));
	for (const auto& c : classes) {
		std::vector<std::complex<double>> sum(x.dim(), 0.0);
		for (auto k : c.members) {
			double phase = 0;
			if (f.holonomy)
				for (std::size_t i = 0; i < x.dim(); ++i)
					phase += to_double((*f.holonomy)[i]) * static_cast<double>(x.facet(k).normal[i]);
			std::complex<double> hol = std::polar(1.0, -2 * std::numbers::pi * phase);
			for (std::size_t i = 0; i < x.dim(); ++i)
				sum[i] += hol * static_cast<double>(x.facet(k).normal[i]);
		}
		for (const auto& s : sum)
			if (std::abs(s) > tol)
				return false;
	}
	return true;
}

struct SolverOptions
{
	double tol = 1e-12;
	int max_iters = 50;
	int max_halvings = 40;
	std::int64_t rounding_denominator = 1'000'000;
};

/// Output of the critical-point search.
struct CriticalFiber
{
	std::vector<double> point;
	std::optional<Fiber> exact; // set iff the rounded point is exactly balanced
	int iterations = 0;
	double gradient_norm = 0;
};

namespace detail {

inline std::vector<double> affine_distances(const ToricFano& x, std::span<const double> u)
{
	std::vector<double> d;
	for (const auto& f : x.facets()) {
		double s = -to_double(f.offset);
		for (std::size_t i = 0; i < x.dim(); ++i)
			s += u[i] * static_cast<double>(f.normal[i]);
		d.push_back(s);
	}
	return d;
}

inline Eigen::VectorXd gradient(const ToricFano& x, std::span<const double> u)
{
	Eigen::VectorXd g(x.dim());
	for (std::size_t i = 0; i < x.dim(); ++i) {
		std::size_t idx[1] = {i};
		g(i) = eval_W_derivative(x, u, idx);
	}
	return g;
}

} // namespace detail

/**
 * Damped Newton iteration on grad W at zero holonomy.
 *
 * W is a sum of exponentials of real affine functions, hence strictly convex
 * with a unique critical point. A step is halved (up to max_halvings times)
 * until the iterate is interior, keeps at least a tenth of every facet
 * distance, and does not increase W.
 */
inline CriticalFiber find_critical_fiber(const ToricFano& x, std::span<const double> init, const SolverOptions& opt = {})
{
	if (init.size() != x.dim())
		throw DimensionMismatch("initial point has wrong length");
	if (!(opt.tol > 0))
		throw Error("solver tolerance must be positive");
	std::vector<double> u(init.begin(), init.end());
	for (double d : detail::affine_distances(x, u))
		if (!(d > 0))
			throw NotInterior("initial point is not interior");

	const std::size_t none[1] = {};
	auto W = [&](std::span<const double> p) { return eval_W_derivative(x, p, std::span<const std::size_t>(none, 0)); };

	CriticalFiber out;
	Eigen::VectorXd g = detail::gradient(x, u);
	int iter = 0;
	while (g.lpNorm<Eigen::Infinity>() >= opt.tol) {
		if (iter >= opt.max_iters)
			throw NoConvergence("Newton iteration did not converge in " + std::to_string(opt.max_iters) +
			                    " iterations (|grad W| = " + std::to_string(g.lpNorm<Eigen::Infinity>()) + ")");
		++iter;
		Eigen::LDLT<Eigen::MatrixXd> ldlt(numeric_hessian(x, u));
		Eigen::VectorXd step = -ldlt.solve(g);
		auto dist = detail::affine_distances(x, u);
		double w0 = W(u);
		double scale = 1;
		bool accepted = false;
		std::vector<double> trial(u.size());
		for (int h = 0; h <= opt.max_halvings; ++h, scale /= 2) {
			for (std::size_t i = 0; i < u.size(); ++i)
				trial[i] = u[i] + scale * step(static_cast<Eigen::Index>(i));
			auto nd = detail::affine_distances(x, trial);
			bool margin_ok = true;
			for (std::size_t k = 0; k < nd.size(); ++k)
				if (!(nd[k] > 0.1 * dist[k]))
					margin_ok = false;
			// near the minimum W is flat to rounding; compare with a relative slack
			if (margin_ok && W(trial) <= w0 * (1 + 1e-14)) {
				accepted = true;
				break;
			}
		}
		if (!accepted)
			throw NoConvergence("step damping exhausted after " + std::to_string(opt.max_halvings) + " halvings");
		u = trial;
		g = detail::gradient(x, u);
	}
	out.point = u;
	out.iterations = iter;
	out.gradient_norm = g.lpNorm<Eigen::Infinity>();

	Fiber rounded;
	for (double c : u)
		rounded.u.push_back(round_rational(c, opt.rounding_denominator));
	if (x.is_interior(rounded.u) && is_balanced(x, rounded).balanced)
		out.exact = std::move(rounded);
	return out;
}

inline CriticalFiber find_critical_fiber(const ToricFano& x, std::span<const Rational> init, const SolverOptions& opt = {})
{
	if (!x.is_interior(init))
		throw NotInterior("initial point is not interior");
	std::vector<double> u;
	for (const auto& r : init)
		u.push_back(to_double(r));
	return find_critical_fiber(x, std::span<const double>(u), opt);
}

/// Q_ij = sum_k v_ki v_kj T^{e_k} q, the formal Hessian of W.
inline QuadraticForm formal_hessian(const ToricFano& x, const Fiber& f)
{
	auto discs = disc_areas(x, f);
	const std::size_t n = x.dim();
	QuadraticForm q(n);
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j <= i; ++j) {
			std::vector<NovikovTerm> terms;
			for (const auto& d : discs) {
				long c = d.normal[i] * d.normal[j];
				if (c != 0)
					terms.push_back({Rational(c), d.area, 1});
			}
			q.set(i, j, NovikovElement::from_terms(std::move(terms)));
		}
	return q;
}

} // namespace toricfloer
