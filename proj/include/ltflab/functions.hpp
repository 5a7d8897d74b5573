#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "circuit.hpp"
#include "constructions.hpp"
#include "errors.hpp"
#include "truth_table.hpp"

namespace ltflab
{

/*! \brief An n-bit Boolean function handle; the assignment is packed into a
 * word with x_0 as the least significant bit. */
using bool_fn = std::function<bool( uint64_t )>;

inline uint64_t low_mask( uint32_t n )
{
  return n >= 64 ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << n ) - 1 );
}

/*! \brief Odd-accepting parity: 1 iff the input has odd Hamming weight. */
inline bool_fn parity_fn( uint32_t n )
{
  uint64_t mask = low_mask( n );
  return [mask]( uint64_t x ) { return ( std::popcount( x & mask ) & 1 ) != 0; };
}

/*! \brief Even-accepting parity, the complement of parity_fn. */
inline bool_fn parity_even_fn( uint32_t n )
{
  uint64_t mask = low_mask( n );
  return [mask]( uint64_t x ) { return ( std::popcount( x & mask ) & 1 ) == 0; };
}

inline bool_fn majority_fn( uint32_t n )
{
  uint64_t mask = low_mask( n );
  uint32_t t = ( n + 1 ) / 2;
  return [mask, t]( uint64_t x ) { return std::popcount( x & mask ) >= int( t ); };
}

inline bool_fn and_fn( uint32_t n )
{
  uint64_t mask = low_mask( n );
  return [mask]( uint64_t x ) { return ( x & mask ) == mask; };
}

inline bool_fn or_fn( uint32_t n )
{
  uint64_t mask = low_mask( n );
  return [mask]( uint64_t x ) { return ( x & mask ) != 0; };
}

inline bool_fn const_fn( bool v )
{
  return [v]( uint64_t ) { return v; };
}

inline bool_fn andreev_fn( uint32_t n )
{
  auto layout = std::make_shared<andreev_layout>( make_andreev_layout( n ) );
  return [layout]( uint64_t x ) { return andreev_eval( *layout, x ); };
}

inline bool_fn not_fn( bool_fn f )
{
  return [f = std::move( f )]( uint64_t x ) { return !f( x ); };
}

/*! \brief Wraps a circuit; small circuits are tabulated once for speed. */
inline bool_fn circuit_fn( std::shared_ptr<const circuit> c )
{
  if ( c->num_inputs() <= 20 )
  {
    auto tt = std::make_shared<truth_table>( c->table() );
    return [tt]( uint64_t x ) { return tt->get( x & low_mask( tt->num_inputs() ) ); };
  }
  return [c]( uint64_t x ) { return c->eval_bits( x ); };
}

inline bool_fn table_fn( std::shared_ptr<const truth_table> tt )
{
  return [tt]( uint64_t x ) { return tt->get( x & low_mask( tt->num_inputs() ) ); };
}

/*! \brief Named function registry used by the command-line tool. */
inline bool_fn named_function( const std::string& name, uint32_t n )
{
  if ( name == "parity" )
    return parity_fn( n );
  if ( name == "parity-even" )
    return parity_even_fn( n );
  if ( name == "majority" )
    return majority_fn( n );
  if ( name == "and" )
    return and_fn( n );
  if ( name == "or" )
    return or_fn( n );
  if ( name == "const0" )
    return const_fn( false );
  if ( name == "const1" )
    return const_fn( true );
  if ( name == "andreev" )
    return andreev_fn( n );
  throw parse_error( "unknown function '" + name + "'" );
}

} // namespace ltflab
