#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <limits>
#include <optional>

namespace ltflab
{

/*! \brief Exact signed integer of arbitrary precision.
 *
 * Gate weights and thresholds are bigints so that threshold comparisons are
 * bit-exact regardless of magnitude. Hot loops downcast to int64 when a
 * precomputed bound shows the sums cannot overflow.
 */
using bigint = boost::multiprecision::cpp_int;

/*! \brief Exact binomial coefficient C(n, k). */
inline bigint binomial(uint64_t n, uint64_t k)
{
  if ( k > n )
    return 0;
  if ( k > n - k )
    k = n - k;
  bigint r = 1;
  for ( uint64_t i = 1; i <= k; ++i )
  {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline std::optional<int64_t> to_int64( const bigint& v )
{
  if ( v < std::numeric_limits<int64_t>::min() || v > std::numeric_limits<int64_t>::max() )
    return std::nullopt;
  return static_cast<int64_t>( v );
}

/*! \brief Exact value of num/2^shift as a double-comparable inequality:
 * returns true iff num/den <= a/2^k evaluated without rounding. */
inline bool ratio_le( const bigint& num, const bigint& den, const bigint& a, unsigned k )
{
  // num/den <= a/2^k  <=>  num * 2^k <= a * den   (den > 0)
  return ( num << k ) <= a * den;
}

} // namespace ltflab
