#pragma once

#include <cstdint>
#include <string>

#include "errors.hpp"

namespace ltflab
{

/*! \brief GF(2^r) arithmetic, 2 <= r <= 16, with a fixed built-in modulus
 * table so matrices are reproducible bit for bit. The modulus is verified
 * irreducible at construction by exhaustive trial division. */
class binary_field
{
public:
  static constexpr unsigned min_degree = 2;
  static constexpr unsigned max_degree = 16;

  explicit binary_field( unsigned r )
      : binary_field( r, builtin_modulus( r ) )
  {
  }

  binary_field( unsigned r, uint32_t modulus )
      : r_( r ), modulus_( modulus )
  {
    if ( r < min_degree || r > max_degree )
      throw structural_error( "binary_field: degree out of range" );
    if ( !is_irreducible( modulus, r ) )
      throw structural_error( "binary_field: modulus is not irreducible of degree " + std::to_string( r ) );
  }

  unsigned degree() const { return r_; }
  uint32_t modulus() const { return modulus_; }
  uint32_t size() const { return uint32_t( 1 ) << r_; }

  static uint32_t add( uint32_t a, uint32_t b ) { return a ^ b; }

  uint32_t mul( uint32_t a, uint32_t b ) const
  {
    uint64_t acc = 0;
    uint64_t aa = a;
    while ( b )
    {
      if ( b & 1 )
        acc ^= aa;
      aa <<= 1;
      b >>= 1;
    }
    // reduce modulo the field polynomial
    for ( int bit = 2 * int( r_ ) - 2; bit >= int( r_ ); --bit )
      if ( ( acc >> bit ) & 1 )
        acc ^= uint64_t( modulus_ ) << ( bit - r_ );
    return static_cast<uint32_t>( acc );
  }

  uint32_t pow( uint32_t a, uint64_t e ) const
  {
    uint32_t r = 1;
    while ( e )
    {
      if ( e & 1 )
        r = mul( r, a );
      a = mul( a, a );
      e >>= 1;
    }
    return r;
  }

  uint32_t inv( uint32_t a ) const
  {
    if ( a == 0 )
      throw structural_error( "binary_field: zero has no inverse" );
    return pow( a, ( uint64_t( 1 ) << r_ ) - 2 );
  }

  /*! \brief Exhaustive divisor check over all polynomials of degree 1..r/2. */
  static bool is_irreducible( uint32_t poly, unsigned r )
  {
    if ( r == 0 || ( poly >> r ) != 1 )
      return false;
    for ( unsigned d = 1; 2 * d <= r; ++d )
      for ( uint32_t div = uint32_t( 1 ) << d; div < ( uint32_t( 2 ) << d ); ++div )
        if ( poly_mod( poly, r, div, d ) == 0 )
          return false;
    return true;
  }

  static uint32_t builtin_modulus( unsigned r )
  {
    switch ( r )
    {
    case 2: return 0x7;      // x^2 + x + 1
    case 3: return 0xB;      // x^3 + x + 1
    case 4: return 0x13;     // x^4 + x + 1
    case 5: return 0x25;     // x^5 + x^2 + 1
    case 6: return 0x43;     // x^6 + x + 1
    case 7: return 0x89;     // x^7 + x^3 + 1
    case 8: return 0x11B;    // x^8 + x^4 + x^3 + x + 1
    case 9: return 0x211;    // x^9 + x^4 + 1
    case 10: return 0x409;   // x^10 + x^3 + 1
    case 11: return 0x805;   // x^11 + x^2 + 1
    case 12: return 0x1053;  // x^12 + x^6 + x^4 + x + 1
    case 13: return 0x201B;  // x^13 + x^4 + x^3 + x + 1
    case 14: return 0x4443;  // x^14 + x^10 + x^6 + x + 1
    case 15: return 0x8003;  // x^15 + x + 1
    case 16: return 0x1100B; // x^16 + x^12 + x^3 + x + 1
    default:
      throw structural_error( "binary_field: no built-in modulus for degree " + std::to_string( r ) );
    }
  }

private:
  static uint32_t poly_mod( uint64_t num, unsigned num_deg, uint32_t div, unsigned div_deg )
  {
    for ( int bit = int( num_deg ); bit >= int( div_deg ); --bit )
      if ( ( num >> bit ) & 1 )
        num ^= uint64_t( div ) << ( bit - div_deg );
    return static_cast<uint32_t>( num );
  }

  unsigned r_;
  uint32_t modulus_;
};

} // namespace ltflab
