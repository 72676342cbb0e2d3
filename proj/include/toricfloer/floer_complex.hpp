#pragma once

#include <bit>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "toricfloer/clifford.hpp"
#include "toricfloer/errors.hpp"
#include "toricfloer/novikov.hpp"
#include "toricfloer/potential.hpp"
#include "toricfloer/toric.hpp"

namespace toricfloer {

struct exterior_tag
{};

/// Class in H^*(T^n) tensor Novikov; e_S stands for l_S = C_S.
using ExteriorClass = BladeExpansion<exterior_tag>;

/// Exterior product, computed from the shuffle sign of the two index sets.
inline ExteriorClass wedge(const ExteriorClass& x, const ExteriorClass& y)
{
	ExteriorClass::check_same_dim(x, y);
	ExteriorClass out(x.dim());
	for (const auto& [a, ca] : x.coeffs())
		for (const auto& [b, cb] : y.coeffs()) {
			if (a & b)
				continue;
			// one sign flip per pair (i in a, j in b) with i > j
			int inversions = 0;
			for (auto j : subset_indices(b))
				inversions += std::popcount(a >> (j + 1));
			NovikovElement c = ca * cb;
			out.add(a | b, inversions % 2 ? -c : c);
		}
	return out;
}

/// Dense matrix over the Novikov ring.
class NovikovMatrix
{
public:
	NovikovMatrix(std::size_t rows = 0, std::size_t cols = 0) : rows_(rows), cols_(cols), data_(rows * cols) {}

	std::size_t rows() const { return rows_; }
	std::size_t cols() const { return cols_; }
	NovikovElement& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
	const NovikovElement& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

	bool is_zero() const
	{
		return std::all_of(data_.begin(), data_.end(), [](const NovikovElement& e) { return e.is_zero(); });
	}

	friend NovikovMatrix operator*(const NovikovMatrix& a, const NovikovMatrix& b)
	{
		if (a.cols_ != b.rows_)
			throw DimensionMismatch("matrix product shape mismatch");
		NovikovMatrix out(a.rows_, b.cols_);
		for (std::size_t i = 0; i < a.rows_; ++i)
			for (std::size_t k = 0; k < a.cols_; ++k) {
				const auto& aik = a(i, k);
				if (aik.is_zero())
					continue;
				for (std::size_t j = 0; j < b.cols_; ++j)
					if (!b(k, j).is_zero())
						out(i, j) += aik * b(k, j);
			}
		return out;
	}

	friend bool operator==(const NovikovMatrix&, const NovikovMatrix&) = default;

	/// Applies the matrix to an exterior class (basis index = subset bitmask).
	ExteriorClass apply(const ExteriorClass& x) const
	{
		ExteriorClass out(x.dim());
		for (const auto& [s, c] : x.coeffs())
			for (std::size_t r = 0; r < rows_; ++r)
				if (!(*this)(r, s).is_zero())
					out.add(static_cast<Subset>(r), (*this)(r, s) * c);
		return out;
	}

private:
	std::size_t rows_, cols_;
	std::vector<NovikovElement> data_;
};

/// The obstruction 1-form alpha = sum_k T^{e_k} q (sum_i v_ki l_i).
inline ExteriorClass obstruction_form(const ToricFano& x, const Fiber& f)
{
	auto discs = disc_areas(x, f);
	ExteriorClass alpha(x.dim());
	for (const auto& d : discs)
		for (std::size_t i = 0; i < x.dim(); ++i)
			if (d.normal[i] != 0)
				alpha.add(Subset(1) << i, NovikovElement::monomial(Rational(d.normal[i]), d.area, 1));
	return alpha;
}

/// Matrix of m1 : x -> (-1)^n alpha ^ x on the 2^n basis (index = subset mask).
inline NovikovMatrix m1_operator(const ToricFano& x, const Fiber& f)
{
	const std::size_t n = x.dim();
	if (n >= 16)
		throw DimensionMismatch("m1 matrix too large");
	ExteriorClass alpha = obstruction_form(x, f);
	if (n % 2)
		alpha = -alpha;
	const std::size_t size = std::size_t(1) << n;
	NovikovMatrix m(size, size);
	for (std::size_t s = 0; s < size; ++s) {
		ExteriorClass img = wedge(alpha, ExteriorClass::basis(n, static_cast<Subset>(s)));
		for (const auto& [t, c] : img.coeffs())
			m(t, s) = c;
	}
	return m;
}

/**
 * Rank over the Novikov field by Gaussian elimination modulo T^{>cutoff}.
 *
 * The pivot is always an entry of least valuation, so every multiplier has
 * nonnegative valuation and truncation errors stay beyond the cutoff. Entries
 * whose true valuation exceeds the cutoff are invisible; see stable_rank.
 */
inline std::size_t novikov_rank(const NovikovMatrix& m, const Rational& cutoff)
{
	const std::size_t R = m.rows(), C = m.cols();
	std::vector<NovikovElement> a(R * C);
	for (std::size_t r = 0; r < R; ++r)
		for (std::size_t c = 0; c < C; ++c)
			a[r * C + c] = m(r, c).truncated(cutoff);
	std::vector<bool> row_done(R, false), col_done(C, false);
	std::size_t rank = 0;
	while (true) {
		std::optional<std::pair<std::size_t, std::size_t>> best;
		for (std::size_t r = 0; r < R; ++r) {
			if (row_done[r])
				continue;
			for (std::size_t c = 0; c < C; ++c) {
				if (col_done[c])
					continue;
				const auto& e = a[r * C + c];
				if (e.is_zero())
					continue;
				if (!best) {
					best = {r, c};
					continue;
				}
				const auto& b = a[best->first * C + best->second];
				if (*e.valuation() < *b.valuation() || (*e.valuation() == *b.valuation() && e.size() < b.size()))
					best = {r, c};
			}
		}
		if (!best)
			break;
		auto [pr, pc] = *best;
		const NovikovElement pivot = a[pr * C + pc];
		const Rational vp = *pivot.valuation();
		const NovikovElement inv = invert(pivot, cutoff - vp);
		for (std::size_t r = 0; r < R; ++r) {
			if (row_done[r] || r == pr || a[r * C + pc].is_zero())
				continue;
			NovikovElement mult = (a[r * C + pc] * inv).truncated(cutoff - vp);
			for (std::size_t c = 0; c < C; ++c) {
				if (col_done[c] || a[pr * C + c].is_zero())
					continue;
				a[r * C + c] = (a[r * C + c] - mult * a[pr * C + c]).truncated(cutoff);
			}
		}
		row_done[pr] = true;
		col_done[pc] = true;
		++rank;
	}
	return rank;
}

struct StableRank
{
	std::size_t rank = 0;
	Rational cutoff;                                          // last cutoff used
	std::vector<std::pair<Rational, std::size_t>> history; // (cutoff, rank)
};

/// Doubles the cutoff until two successive cutoffs give the same rank.
/// The default start is twice the largest entry valuation (at least 1).
inline StableRank stable_rank(const NovikovMatrix& m, std::optional<Rational> initial_cutoff = std::nullopt)
{
	Rational cutoff = 1;
	if (initial_cutoff) {
		cutoff = *initial_cutoff;
	} else {
		for (std::size_t r = 0; r < m.rows(); ++r)
			for (std::size_t c = 0; c < m.cols(); ++c)
				if (auto v = m(r, c).valuation(); v && 2 * *v > cutoff)
					cutoff = 2 * *v;
	}
	if (cutoff <= 0)
		cutoff = 1;
	StableRank out;
	std::size_t prev = novikov_rank(m, cutoff);
	out.history.emplace_back(cutoff, prev);
	for (int guard = 0; guard < 16; ++guard) {
		cutoff *= 2;
		std::size_t cur = novikov_rank(m, cutoff);
		out.history.emplace_back(cutoff, cur);
		if (cur == prev) {
			out.rank = cur;
			out.cutoff = cutoff;
			return out;
		}
		prev = cur;
	}
	throw NoConvergence("Novikov rank did not stabilize");
}

struct HfRank
{
	std::size_t rank = 0;    // rank of HF
	std::size_t m1_rank = 0; // rank of m1 over the Novikov field
	StableRank elimination;
};

/// rank HF = 2^n - 2 rank(m1), using m1^2 = 0.
inline HfRank hf_rank_details(const ToricFano& x, const Fiber& f)
{
	NovikovMatrix m = m1_operator(x, f);
	HfRank out;
	out.elimination = stable_rank(m);
	out.m1_rank = out.elimination.rank;
	out.rank = m.rows() - 2 * out.m1_rank;
	return out;
}

inline std::size_t hf_rank(const ToricFano& x, const Fiber& f)
{
	return hf_rank_details(x, f).rank;
}

/// Intersection pairing C_i . (boundary of beta_k) = (-1)^n v_ki.
inline long divisor_pairing(std::span<const long> normal, std::size_t n, std::size_t i)
{
	return (n % 2 ? -1 : 1) * normal[i];
}

/// Contribution of one disc: (-1)^{nm} v_{k,i1}...v_{k,im} T^{area} q.
inline NovikovElement l_product_disc(std::span<const long> normal, const Rational& area, std::size_t n,
                                     std::span<const std::size_t> idx)
{
	long c = (n * idx.size()) % 2 ? -1 : 1;
	for (auto i : idx) {
		if (i >= normal.size())
			throw DimensionMismatch("l-product index out of range");
		c *= normal[i];
	}
	return NovikovElement::monomial(Rational(c), area, 1);
}

/// Same disc contribution assembled by dropping degree-one inputs one at a
/// time through the divisor pairing, down to l_0 = T^{area} q.
inline NovikovElement l_product_disc_by_divisor(std::span<const long> normal, const Rational& area, std::size_t n,
                                                std::span<const std::size_t> idx)
{
	if (idx.empty())
		return NovikovElement::monomial(Rational(1), area, 1);
	return Rational(divisor_pairing(normal, n, idx.front())) *
	       l_product_disc_by_divisor(normal, area, n, idx.subspan(1));
}

/// l_m(C_{i1},...,C_{im}) = (-1)^{nm} sum_k v_{k,i1}...v_{k,im} T^{e_k} q (0-based indices).
inline NovikovElement l_product(const ToricFano& x, const Fiber& f, std::span<const std::size_t> idx)
{
	auto discs = disc_areas(x, f);
	NovikovElement sum;
	for (const auto& d : discs)
		sum += l_product_disc(d.normal, d.area, x.dim(), idx);
	return sum;
}

/// The product m2-tilde on HF, realized in Cl(V, Q) with Q the formal Hessian.
inline CliffordElement m2_product(const ToricFano& x, const Fiber& f, const ExteriorClass& a, const ExteriorClass& b)
{
	if (!is_balanced(x, f).balanced)
		throw NotBalanced("Floer cohomology vanishes at this fiber; no product is defined");
	QuadraticForm q = formal_hessian(x, f);
	return cl_mul(q, a.retag<clifford_tag>(), b.retag<clifford_tag>());
}

} // namespace toricfloer
