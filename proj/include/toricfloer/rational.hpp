#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <regex>
#include <string>
#include <string_view>

#include "toricfloer/errors.hpp"

namespace toricfloer {

// Expression templates off: values are stored and passed around freely.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

inline Rational make_rational(long num, long den = 1)
{
	if (den == 0)
		throw ZeroDivision("rational with zero denominator");
	return Rational(num) / Rational(den);
}

/// Parses "p", "-p" or "p/q". Decimal and exponent notation are rejected.
inline Rational parse_rational(std::string_view text)
{
	static const std::regex pattern(R"(^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$)");
	std::match_results<std::string_view::const_iterator> m;
	if (!std::regex_match(text.begin(), text.end(), m, pattern))
		throw ParseError("not an exact rational: '" + std::string(text) + "'");
	Integer num(m[1].str());
	Integer den(1);
	if (m[2].matched)
		den = Integer(m[2].str());
	if (den == 0)
		throw ParseError("zero denominator in '" + std::string(text) + "'");
	return Rational(num) / Rational(den);
}

inline std::string to_string(const Rational& r)
{
	return r.str();
}

inline double to_double(const Rational& r)
{
	return r.convert_to<double>();
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents plus the final semiconvergent).
inline Rational round_rational(double x, std::int64_t max_den)
{
	if (!std::isfinite(x))
		throw Error("cannot round a non-finite value");
	Rational target(x); // exact binary value of x
	Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
	Rational rest = target;
	for (int iter = 0; iter < 128; ++iter) {
		Integer a = boost::multiprecision::numerator(rest) / boost::multiprecision::denominator(rest);
		if (rest < 0 && Rational(a) != rest)
			a -= 1; // floor for negatives
		Integer p2 = a * p1 + p0;
		Integer q2 = a * q1 + q0;
		if (q2 > max_den) {
			// semiconvergent with the largest admissible multiplier
			Integer k = (Integer(max_den) - q0) / q1;
			Integer ps = k * p1 + p0, qs = k * q1 + q0;
			Rational c1 = Rational(p1) / Rational(q1);
			if (qs > 0) {
				Rational cs = Rational(ps) / Rational(qs);
				if (abs(cs - target) < abs(c1 - target))
					return cs;
			}
			return c1;
		}
		p0 = p1;
		q0 = q1;
		p1 = p2;
		q1 = q2;
		Rational frac = rest - Rational(a);
		if (frac == 0)
			break;
		rest = 1 / frac;
	}
	return Rational(p1) / Rational(q1);
}

} // namespace toricfloer
