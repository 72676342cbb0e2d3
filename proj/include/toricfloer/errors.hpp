#pragma once

#include <stdexcept>
#include <string>

namespace toricfloer {

/// Base of every error raised by the library. The CLI maps subclasses to
/// exit codes (see tools/toricfloer.cpp).
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

class ParseError : public Error
{
public:
	using Error::Error;
};

class InvalidPolytope : public Error
{
public:
	using Error::Error;
};

class NotInterior : public Error
{
public:
	using Error::Error;
};

class NoConvergence : public Error
{
public:
	using Error::Error;
};

class NotBalanced : public Error
{
public:
	using Error::Error;
};

class DimensionMismatch : public Error
{
public:
	using Error::Error;
};

class ZeroDivision : public Error
{
public:
	using Error::Error;
};

} // namespace toricfloer
