#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "toricfloer/errors.hpp"
#include "toricfloer/novikov.hpp"
#include "toricfloer/potential.hpp"

namespace toricfloer {

/// Index subset S of {0..n-1} as a bitmask (bit i <-> generator i).
using Subset = std::uint32_t;

inline constexpr std::size_t max_generators = 24;

/// Orders subsets by size, then lexicographically by their sorted indices.
struct SubsetOrder
{
	bool operator()(Subset a, Subset b) const
	{
		int pa = std::popcount(a), pb = std::popcount(b);
		if (pa != pb)
			return pa < pb;
		// lexicographic on sorted indices: the first differing index decides;
		// the subset holding the smaller one comes first
		Subset diff = a ^ b;
		if (diff == 0)
			return false;
		Subset low = diff & (~diff + 1);
		return (a & low) != 0;
	}
};

inline std::vector<std::size_t> subset_indices(Subset s)
{
	std::vector<std::size_t> out;
	for (std::size_t i = 0; s; ++i, s >>= 1)
		if (s & 1)
			out.push_back(i);
	return out;
}

inline Subset subset_of(std::initializer_list<std::size_t> idx)
{
	Subset s = 0;
	for (auto i : idx)
		s |= Subset(1) << i;
	return s;
}

/// 1-based "i,j,k" label of a subset.
inline std::string subset_label(Subset s)
{
	std::string out;
	for (auto i : subset_indices(s))
		out += (out.empty() ? "" : ",") + std::to_string(i + 1);
	return out;
}

/**
 * Linear combination of basis elements indexed by subsets of {0..n-1}, with
 * Novikov coefficients. The Tag separates Clifford elements from exterior
 * classes; both share storage and printing.
 */
template <class Tag>
class BladeExpansion
{
public:
	using Map = std::map<Subset, NovikovElement, SubsetOrder>;

	explicit BladeExpansion(std::size_t n = 0) : n_(n)
	{
		if (n > max_generators)
			throw DimensionMismatch("too many generators");
	}

	/// coeff * e_S
	static BladeExpansion basis(std::size_t n, Subset s, const NovikovElement& coeff = NovikovElement(1))
	{
		BladeExpansion r(n);
		r.add(s, coeff);
		return r;
	}

	/// The single generator e_i.
	static BladeExpansion generator(std::size_t n, std::size_t i) { return basis(n, Subset(1) << i); }

	static BladeExpansion unit(std::size_t n, const NovikovElement& coeff = NovikovElement(1))
	{
		return basis(n, 0, coeff);
	}

	std::size_t dim() const { return n_; }
	const Map& coeffs() const& { return coeffs_; }
	void coeffs() const&& = delete; // would dangle in a range-for
	bool is_zero() const { return coeffs_.empty(); }

	NovikovElement coeff(Subset s) const
	{
		auto it = coeffs_.find(s);
		return it == coeffs_.end() ? NovikovElement() : it->second;
	}

	void add(Subset s, const NovikovElement& c)
	{
		if (n_ < max_generators && (s >> n_) != 0)
			throw DimensionMismatch("basis subset outside the generator range");
		if (c.is_zero())
			return;
		auto [it, inserted] = coeffs_.try_emplace(s, c);
		if (!inserted) {
			it->second += c;
			if (it->second.is_zero())
				coeffs_.erase(it);
		}
	}

	friend BladeExpansion operator+(BladeExpansion a, const BladeExpansion& b)
	{
		check_same_dim(a, b);
		for (const auto& [s, c] : b.coeffs_)
			a.add(s, c);
		return a;
	}

	friend BladeExpansion operator-(const BladeExpansion& a) { return NovikovElement(-1) * a; }
	friend BladeExpansion operator-(const BladeExpansion& a, const BladeExpansion& b) { return a + (-b); }

	friend BladeExpansion operator*(const NovikovElement& c, const BladeExpansion& a)
	{
		BladeExpansion r(a.n_);
		for (const auto& [s, x] : a.coeffs_)
			r.add(s, c * x);
		return r;
	}

	friend bool operator==(const BladeExpansion&, const BladeExpansion&) = default;

	/// Restriction to basis subsets of size d.
	BladeExpansion grade(std::size_t d) const
	{
		BladeExpansion r(n_);
		for (const auto& [s, c] : coeffs_)
			if (static_cast<std::size_t>(std::popcount(s)) == d)
				r.coeffs_.emplace(s, c);
		return r;
	}

	/// "(coeff)*C_{1,2} + (coeff)*[L]" in basis order; "0" when empty.
	std::string to_string(const RenderOptions& opt = {}) const
	{
		if (coeffs_.empty())
			return "0";
		std::ostringstream os;
		bool first = true;
		for (const auto& [s, c] : coeffs_) {
			os << (first ? "" : " + ") << "(" << c.to_string(opt) << ")*";
			if (s == 0)
				os << "[L]";
			else
				os << "C_{" << subset_label(s) << "}";
			first = false;
		}
		return os.str();
	}

	static void check_same_dim(const BladeExpansion& a, const BladeExpansion& b)
	{
		if (a.n_ != b.n_)
			throw DimensionMismatch("elements live over different numbers of generators");
	}

	/// Reinterprets the same coefficients under another tag.
	template <class Other>
	BladeExpansion<Other> retag() const
	{
		BladeExpansion<Other> r(n_);
		for (const auto& [s, c] : coeffs_)
			r.add(s, c);
		return r;
	}

private:
	std::size_t n_;
	Map coeffs_;
};

struct clifford_tag
{};
using CliffordElement = BladeExpansion<clifford_tag>;

namespace detail {

// C_i * e_B in normal form. Moving C_i right past C_b (b < i) uses
// C_i C_b = -C_b C_i + Q_ib; meeting C_i itself contracts to Q_ii / 2.
inline CliffordElement generator_times_blade(const QuadraticForm& q, std::size_t i, Subset blade)
{
	const std::size_t n = q.dim();
	if (blade == 0)
		return CliffordElement::generator(n, i);
	std::size_t b = static_cast<std::size_t>(std::countr_zero(blade));
	Subset rest = blade & (blade - 1);
	if (i < b)
		return CliffordElement::basis(n, blade | (Subset(1) << i));
	if (i == b)
		return CliffordElement::basis(n, rest, make_rational(1, 2) * q(i, i));
	// i > b: C_i C_b e_rest = -C_b (C_i e_rest) + Q_ib e_rest; every blade of
	// C_i e_rest has indices above b, so C_b prepends with sign +1.
	CliffordElement tail = generator_times_blade(q, i, rest);
	CliffordElement out(n);
	for (const auto& [s, c] : tail.coeffs())
		out.add(s | (Subset(1) << b), -c);
	out.add(rest, q(i, b));
	return out;
}

inline CliffordElement blade_times_element(const QuadraticForm& q, Subset a, const CliffordElement& y)
{
	CliffordElement acc = y;
	auto idx = subset_indices(a);
	for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
		CliffordElement next(q.dim());
		for (const auto& [s, c] : acc.coeffs())
			next = next + c * generator_times_blade(q, *it, s);
		acc = std::move(next);
	}
	return acc;
}

} // namespace detail

/// Product in Cl(V, Q): C_i C_j + C_j C_i = Q_ij for i != j and C_i^2 = Q_ii / 2.
inline CliffordElement cl_mul(const QuadraticForm& q, const CliffordElement& x, const CliffordElement& y)
{
	if (x.dim() != q.dim() || y.dim() != q.dim())
		throw DimensionMismatch("Clifford operands and quadratic form disagree on n");
	CliffordElement out(q.dim());
	for (const auto& [a, ca] : x.coeffs()) {
		CliffordElement right = detail::blade_times_element(q, a, y);
		out = out + ca * right;
	}
	return out;
}

inline CliffordElement cl_grade(const CliffordElement& x, std::size_t d)
{
	if (d > x.dim())
		throw DimensionMismatch("grade exceeds number of generators");
	return x.grade(d);
}

/// Defining relations of Cl(V,Q) as text, in both conventions.
inline std::vector<std::string> clifford_relations(const QuadraticForm& q, const RenderOptions& opt = {})
{
	std::vector<std::string> out;
	for (std::size_t i = 0; i < q.dim(); ++i) {
		std::string ci = "C_" + std::to_string(i + 1);
		out.push_back(ci + "*" + ci + " = (1/2)*(" + q(i, i).to_string(opt) + ")*[L]");
	}
	for (std::size_t i = 0; i < q.dim(); ++i)
		for (std::size_t j = i + 1; j < q.dim(); ++j) {
			std::string ci = "C_" + std::to_string(i + 1), cj = "C_" + std::to_string(j + 1);
			out.push_back(ci + "*" + cj + " + " + cj + "*" + ci + " = (" + q(i, j).to_string(opt) + ")*[L]");
		}
	return out;
}

} // namespace toricfloer
