#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "toricfloer/errors.hpp"
#include "toricfloer/rational.hpp"

namespace toricfloer {

/// One monomial coeff * T^t_exp * q^q_exp of the universal Novikov ring.
struct NovikovTerm
{
	Rational coeff;
	Rational t_exp;
	int q_exp = 0;

	friend bool operator==(const NovikovTerm&, const NovikovTerm&) = default;
};

/// Display options shared by every pretty-printer in the library.
struct RenderOptions
{
	/// Prints T-exponents as "2pi*e" instead of the affine area e.
	bool two_pi = false;
};

/**
 * Finite formal sum of NovikovTerms.
 *
 * Terms are kept strictly sorted by (t_exp, q_exp) with nonzero coefficients,
 * so two elements are equal iff their term vectors are equal. The empty
 * sequence is zero.
 */
class NovikovElement
{
public:
	NovikovElement() = default;

	/// The constant c * T^0 q^0.
	NovikovElement(const Rational& c)
	{
		if (c != 0)
			terms_.push_back({c, Rational(0), 0});
	}
	NovikovElement(long c) : NovikovElement(Rational(c)) {}

	static NovikovElement monomial(const Rational& coeff, const Rational& t_exp, int q_exp)
	{
		NovikovElement r;
		if (coeff != 0)
			r.terms_.push_back({coeff, t_exp, q_exp});
		return r;
	}

	/// Builds an element from arbitrary terms (any order, repeats allowed).
	static NovikovElement from_terms(std::vector<NovikovTerm> terms)
	{
		NovikovElement r;
		r.terms_ = std::move(terms);
		r.normalize();
		return r;
	}

	const std::vector<NovikovTerm>& terms() const& { return terms_; }
	void terms() const&& = delete; // would dangle in a range-for
	bool is_zero() const { return terms_.empty(); }
	std::size_t size() const { return terms_.size(); }

	/// Least T-exponent; nullopt stands for +infinity (the zero element).
	std::optional<Rational> valuation() const
	{
		if (terms_.empty())
			return std::nullopt;
		return terms_.front().t_exp;
	}

	/// Drops every term with T-exponent strictly above `cutoff`.
	NovikovElement truncated(const Rational& cutoff) const
	{
		NovikovElement r;
		for (const auto& t : terms_)
			if (t.t_exp <= cutoff)
				r.terms_.push_back(t);
		return r;
	}

	/// True when every term has the given q-exponent.
	bool q_homogeneous(int q_exp) const
	{
		return std::all_of(terms_.begin(), terms_.end(),
		                   [&](const NovikovTerm& t) { return t.q_exp == q_exp; });
	}

	NovikovElement operator-() const
	{
		NovikovElement r = *this;
		for (auto& t : r.terms_)
			t.coeff = -t.coeff;
		return r;
	}

	friend NovikovElement operator+(const NovikovElement& a, const NovikovElement& b)
	{
		NovikovElement r;
		r.terms_.reserve(a.terms_.size() + b.terms_.size());
		auto i = a.terms_.begin(), j = b.terms_.begin();
		while (i != a.terms_.end() || j != b.terms_.end()) {
			if (j == b.terms_.end() || (i != a.terms_.end() && key_less(*i, *j)))
				r.terms_.push_back(*i++);
			else if (i == a.terms_.end() || key_less(*j, *i))
				r.terms_.push_back(*j++);
			else {
				Rational c = i->coeff + j->coeff;
				if (c != 0)
					r.terms_.push_back({c, i->t_exp, i->q_exp});
				++i;
				++j;
			}
		}
		return r;
	}

	friend NovikovElement operator-(const NovikovElement& a, const NovikovElement& b) { return a + (-b); }

	friend NovikovElement operator*(const NovikovElement& a, const NovikovElement& b)
	{
		if (a.is_zero() || b.is_zero())
			return {};
		std::vector<NovikovTerm> prod;
		prod.reserve(a.terms_.size() * b.terms_.size());
		for (const auto& x : a.terms_)
			for (const auto& y : b.terms_)
				prod.push_back({x.coeff * y.coeff, x.t_exp + y.t_exp, x.q_exp + y.q_exp});
		return from_terms(std::move(prod));
	}

	friend NovikovElement operator*(const Rational& c, const NovikovElement& a)
	{
		if (c == 0)
			return {};
		NovikovElement r = a;
		for (auto& t : r.terms_)
			t.coeff *= c;
		return r;
	}

	NovikovElement& operator+=(const NovikovElement& o) { return *this = *this + o; }
	NovikovElement& operator-=(const NovikovElement& o) { return *this = *this - o; }
	NovikovElement& operator*=(const NovikovElement& o) { return *this = *this * o; }

	friend bool operator==(const NovikovElement&, const NovikovElement&) = default;

	/// Orders elements lexicographically by their term vectors (for use as map keys).
	friend bool operator<(const NovikovElement& a, const NovikovElement& b)
	{
		return std::lexicographical_compare(
		    a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end(),
		    [](const NovikovTerm& x, const NovikovTerm& y) {
			    return std::tie(x.t_exp, x.q_exp, x.coeff) < std::tie(y.t_exp, y.q_exp, y.coeff);
		    });
	}

	/// Substitutes T^e -> exp(-e) and q -> 1.
	double numeric() const
	{
		double s = 0;
		for (const auto& t : terms_)
			s += to_double(t.coeff) * std::exp(-to_double(t.t_exp));
		return s;
	}

	/// "a*T^{p/q}*q^m + ..." in sorted order; coefficient 1 and trivial
	/// powers are elided, "0" for the zero element.
	std::string to_string(const RenderOptions& opt = {}) const
	{
		if (terms_.empty())
			return "0";
		std::ostringstream os;
		bool first = true;
		for (const auto& t : terms_) {
			Rational c = t.coeff;
			if (first) {
				if (c < 0) {
					os << "-";
					c = -c;
				}
			} else {
				os << (c < 0 ? " - " : " + ");
				if (c < 0)
					c = -c;
			}
			first = false;
			std::vector<std::string> factors;
			bool trivial_monomial = t.t_exp == 0 && t.q_exp == 0;
			if (c != 1 || trivial_monomial)
				factors.push_back(c.str());
			if (t.t_exp != 0)
				factors.push_back(opt.two_pi ? "T^{2pi*" + t.t_exp.str() + "}" : "T^{" + t.t_exp.str() + "}");
			if (t.q_exp == 1)
				factors.push_back("q");
			else if (t.q_exp != 0)
				factors.push_back("q^" + std::to_string(t.q_exp));
			for (std::size_t k = 0; k < factors.size(); ++k)
				os << (k ? "*" : "") << factors[k];
		}
		return os.str();
	}

private:
	static bool key_less(const NovikovTerm& x, const NovikovTerm& y)
	{
		return std::tie(x.t_exp, x.q_exp) < std::tie(y.t_exp, y.q_exp);
	}

	void normalize()
	{
		std::sort(terms_.begin(), terms_.end(), key_less);
		std::vector<NovikovTerm> out;
		out.reserve(terms_.size());
		for (auto& t : terms_) {
			if (!out.empty() && out.back().t_exp == t.t_exp && out.back().q_exp == t.q_exp)
				out.back().coeff += t.coeff;
			else
				out.push_back(std::move(t));
			if (out.back().coeff == 0)
				out.pop_back();
		}
		terms_ = std::move(out);
	}

	std::vector<NovikovTerm> terms_;
};

inline constexpr long default_inversion_cutoff = 10;

/**
 * Truncated inverse: returns b with a*b - 1 of valuation > cutoff.
 *
 * Writes a = lead * (1 + r) with lead the least term, so r has strictly
 * positive valuation, and sums the geometric series in -r, dropping every
 * term beyond the cutoff. Requires the least-T part of `a` to be a single
 * monomial; otherwise the series has no T-adic convergence.
 */
inline NovikovElement invert(const NovikovElement& a, const Rational& cutoff = Rational(default_inversion_cutoff))
{
	if (a.is_zero())
		throw ZeroDivision("inverting the zero Novikov element");
	const auto& terms = a.terms();
	const NovikovTerm& lead = terms.front();
	if (terms.size() > 1 && terms[1].t_exp == lead.t_exp)
		throw ZeroDivision("least-valuation part is not a monomial; no T-adic inverse");

	NovikovElement lead_inv = NovikovElement::monomial(1 / lead.coeff, -lead.t_exp, -lead.q_exp);
	NovikovElement minus_r = -(a * lead_inv - NovikovElement(1));

	// In normalized units u = a/lead the target is u*s - 1 beyond `cutoff`;
	// dropping terms of s beyond the cutoff is harmless because u has valuation 0.
	NovikovElement sum(1);
	NovikovElement power(1);
	while (true) {
		power = (power * minus_r).truncated(cutoff);
		if (power.is_zero())
			break;
		sum += power;
	}
	return sum * lead_inv;
}

} // namespace toricfloer
