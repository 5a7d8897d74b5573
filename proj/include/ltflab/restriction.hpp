#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "circuit.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace ltflab
{

/*! \brief Disjoint index sets covering [n]; part sizes differ by at most 1.
 *
 * The equal-size requirement is relaxed to near-equal so that part counts
 * that do not divide n are still usable.
 */
class partition
{
public:
  partition( uint32_t n, std::vector<std::vector<uint32_t>> parts )
      : n_( n ), parts_( std::move( parts ) )
  {
    std::vector<uint8_t> seen( n, 0 );
    size_t lo = n, hi = 0, covered = 0;
    for ( const auto& part : parts_ )
    {
      if ( part.empty() )
        throw structural_error( "partition: empty part" );
      lo = std::min( lo, part.size() );
      hi = std::max( hi, part.size() );
      for ( uint32_t v : part )
      {
        if ( v >= n || seen[v] )
          throw structural_error( "partition: parts must be disjoint subsets of [n]" );
        seen[v] = 1;
        ++covered;
      }
    }
    if ( covered != n )
      throw structural_error( "partition: parts must cover [n]" );
    if ( hi - lo > 1 )
      throw structural_error( "partition: part sizes may differ by at most 1" );
  }

  /*! \brief k contiguous blocks of near-equal size. */
  static partition contiguous( uint32_t n, uint32_t k )
  {
    if ( k == 0 || k > n )
      throw structural_error( "partition: need 1 <= parts <= n" );
    std::vector<std::vector<uint32_t>> parts( k );
    uint32_t base = n / k, extra = n % k, pos = 0;
    for ( uint32_t i = 0; i < k; ++i )
    {
      uint32_t size = base + ( i < extra ? 1 : 0 );
      for ( uint32_t j = 0; j < size; ++j )
        parts[i].push_back( pos++ );
    }
    return partition( n, std::move( parts ) );
  }

  /*! \brief Part of index v is v mod k; spreads every part across [n]. */
  static partition round_robin( uint32_t n, uint32_t k )
  {
    if ( k == 0 || k > n )
      throw structural_error( "partition: need 1 <= parts <= n" );
    std::vector<std::vector<uint32_t>> parts( k );
    for ( uint32_t v = 0; v < n; ++v )
      parts[v % k].push_back( v );
    return partition( n, std::move( parts ) );
  }

  static partition singletons( uint32_t n )
  {
    return contiguous( n, n );
  }

  uint32_t n() const { return n_; }
  uint32_t size() const { return static_cast<uint32_t>( parts_.size() ); }
  const std::vector<std::vector<uint32_t>>& parts() const { return parts_; }

private:
  uint32_t n_;
  std::vector<std::vector<uint32_t>> parts_;
};

enum class trit : uint8_t
{
  zero = 0,
  one = 1,
  star = 2
};

/*! \brief Partial assignment [n] -> {0, 1, *}. Serializes as a string over
 * {0,1,*} with coordinate 0 first. */
class restriction
{
public:
  explicit restriction( std::vector<trit> vals )
      : vals_( std::move( vals ) )
  {
  }

  static restriction parse( const std::string& s )
  {
    std::vector<trit> vals;
    vals.reserve( s.size() );
    for ( char c : s )
    {
      if ( c == '0' )
        vals.push_back( trit::zero );
      else if ( c == '1' )
        vals.push_back( trit::one );
      else if ( c == '*' )
        vals.push_back( trit::star );
      else
        throw parse_error( "restriction: invalid character" );
    }
    return restriction( std::move( vals ) );
  }

  std::string to_string() const
  {
    std::string s;
    s.reserve( vals_.size() );
    for ( trit t : vals_ )
      s.push_back( t == trit::zero ? '0' : t == trit::one ? '1' : '*' );
    return s;
  }

  uint32_t n() const { return static_cast<uint32_t>( vals_.size() ); }
  trit at( uint32_t i ) const { return vals_[i]; }
  bool is_star( uint32_t i ) const { return vals_[i] == trit::star; }

  uint32_t star_count() const
  {
    uint32_t c = 0;
    for ( trit t : vals_ )
      c += t == trit::star;
    return c;
  }

  std::vector<uint32_t> star_indices() const
  {
    std::vector<uint32_t> idx;
    for ( uint32_t i = 0; i < vals_.size(); ++i )
      if ( vals_[i] == trit::star )
        idx.push_back( i );
    return idx;
  }

  /*! \brief True if other fixes a superset of this restriction's fixed
   * coordinates, agreeing on all of them. */
  bool extended_by( const restriction& other ) const
  {
    if ( other.n() != n() )
      return false;
    for ( uint32_t i = 0; i < n(); ++i )
      if ( vals_[i] != trit::star && other.vals_[i] != vals_[i] )
        return false;
    return true;
  }

private:
  std::vector<trit> vals_;
};

/*! \brief Bit-packed restriction for high-throughput sampling. Value bits on
 * starred coordinates are meaningless. */
struct packed_restriction
{
  uint32_t n = 0;
  std::vector<uint64_t> value_bits;
  std::vector<uint64_t> star_bits;

  bool is_star( uint32_t i ) const { return ( star_bits[i >> 6] >> ( i & 63 ) ) & 1; }
  bool value( uint32_t i ) const { return ( value_bits[i >> 6] >> ( i & 63 ) ) & 1; }
};

/*! \brief Random restriction across a partition: one uniformly chosen star
 * per part, all other coordinates independent fair bits. Fully determined by
 * (seed, trial). */
inline packed_restriction sample_packed_restriction( const partition& P, uint64_t seed, uint64_t trial )
{
  split_rng rng( seed, trial );
  packed_restriction r;
  r.n = P.n();
  rng.fill_bits( r.value_bits, P.n() );
  r.star_bits.assign( r.value_bits.size(), 0 );
  for ( const auto& part : P.parts() )
  {
    uint32_t star = part[rng.below( part.size() )];
    r.star_bits[star >> 6] |= uint64_t( 1 ) << ( star & 63 );
  }
  return r;
}

inline restriction unpack( const packed_restriction& p )
{
  std::vector<trit> vals( p.n );
  for ( uint32_t i = 0; i < p.n; ++i )
    vals[i] = p.is_star( i ) ? trit::star : ( p.value( i ) ? trit::one : trit::zero );
  return restriction( std::move( vals ) );
}

inline restriction sample_restriction( const partition& P, uint64_t seed, uint64_t trial )
{
  return unpack( sample_packed_restriction( P, seed, trial ) );
}

enum class forced_state : uint8_t
{
  forced_zero,
  forced_one,
  not_forced
};

namespace detail
{

inline void require_input_gate( const gate& g )
{
  for ( const auto& w : g.wires )
    if ( !w.ref.is_input() )
      throw structural_error( "restriction ops: gate must read primary inputs only" );
}

} // namespace detail

/*! \brief Exact forcing test for a threshold gate under a restriction.
 *
 * With s the fixed-part sum, maxfree the sum of positive free weights and
 * minfree the sum of negative free weights: forced to one iff s + minfree >=
 * t, forced to zero iff s + maxfree < t.
 */
inline forced_state forced_constant( const gate& g, const restriction& rho )
{
  if ( g.kind == gate_kind::mod2 || g.kind == gate_kind::mod3 )
    throw structural_error( "forced_constant: defined for threshold gates" );
  detail::require_input_gate( g );
  bigint s = 0, maxfree = 0, minfree = 0;
  for ( const auto& w : g.wires )
  {
    if ( w.ref.index >= rho.n() )
      throw structural_error( "forced_constant: restriction does not cover gate inputs" );
    trit t = rho.at( w.ref.index );
    if ( t == trit::star )
    {
      if ( w.weight > 0 )
        maxfree += w.weight;
      else
        minfree += w.weight;
    }
    else if ( t == trit::one )
    {
      s += w.weight;
    }
  }
  if ( s + minfree >= g.threshold )
    return forced_state::forced_one;
  if ( s + maxfree < g.threshold )
    return forced_state::forced_zero;
  return forced_state::not_forced;
}

enum class forcing_kind : uint8_t
{
  forced_zero,
  forced_one,
  single_input,
  many_inputs
};

struct forcing_outcome
{
  forcing_kind kind = forcing_kind::many_inputs;
  uint32_t input = 0; // single_input: the free variable the gate reduces to
  bool negated = false;

  bool forced() const
  {
    return kind == forcing_kind::forced_zero || kind == forcing_kind::forced_one;
  }
};

namespace detail
{

constexpr uint32_t forcing_brute_force_limit = 24;

/*! \brief Classifies the function mask -> out over b free variables given
 * its full table; outs has 2^b entries. */
inline forcing_outcome classify_table( const std::vector<uint8_t>& outs, uint32_t b,
                                       const std::vector<uint32_t>& free_vars )
{
  uint32_t relevant = 0;
  uint32_t relevant_count = 0;
  for ( uint32_t j = 0; j < b && relevant_count < 2; ++j )
  {
    uint64_t bit = uint64_t( 1 ) << j;
    for ( uint64_t m = 0; m < outs.size(); ++m )
      if ( !( m & bit ) && outs[m] != outs[m | bit] )
      {
        relevant = j;
        ++relevant_count;
        break;
      }
  }
  if ( relevant_count == 0 )
    return { outs[0] ? forcing_kind::forced_one : forcing_kind::forced_zero, 0, false };
  if ( relevant_count == 1 )
  {
    bool on_one = outs[uint64_t( 1 ) << relevant] != 0;
    return { forcing_kind::single_input, free_vars[relevant], !on_one };
  }
  return { forcing_kind::many_inputs, 0, false };
}

} // namespace detail

/*! \brief Classifies the restricted gate: a constant, a function of exactly
 * one free variable (possibly negated), or dependent on two or more.
 *
 * Ground truth by exhaustive evaluation over all completions of the free
 * gate inputs; unit-weight threshold gates take an equivalent closed-form
 * shortcut. At most 24 free inputs (capacity error above).
 */
inline forcing_outcome forced_single_input( const gate& g, const restriction& rho )
{
  detail::require_input_gate( g );
  std::vector<uint32_t> free_vars;
  for ( const auto& w : g.wires )
  {
    if ( w.ref.index >= rho.n() )
      throw structural_error( "forced_single_input: restriction does not cover gate inputs" );
    if ( rho.is_star( w.ref.index ) )
      free_vars.push_back( w.ref.index );
  }
  uint32_t b = static_cast<uint32_t>( free_vars.size() );
  if ( b > detail::forcing_brute_force_limit )
    throw capacity_error( "forced_single_input: " + std::to_string( b ) + " free inputs exceeds brute-force limit" );

  bool threshold_kind = g.kind != gate_kind::mod2 && g.kind != gate_kind::mod3;
  if ( threshold_kind && g.unit_weights() )
  {
    // [s + (free ones) >= t]: behaviour determined by m = t - s against b
    bigint s = 0;
    for ( const auto& w : g.wires )
      if ( !rho.is_star( w.ref.index ) && rho.at( w.ref.index ) == trit::one )
        s += w.weight;
    bigint m = g.threshold - s;
    if ( m <= 0 )
      return { forcing_kind::forced_one, 0, false };
    if ( m > b )
      return { forcing_kind::forced_zero, 0, false };
    if ( b == 1 )
      return { forcing_kind::single_input, free_vars[0], false };
    return { forcing_kind::many_inputs, 0, false };
  }

  // brute force over all completions of the free gate inputs
  bigint base = 0;
  std::vector<bigint> fw;
  for ( const auto& w : g.wires )
  {
    if ( rho.is_star( w.ref.index ) )
      fw.push_back( w.weight );
    else if ( rho.at( w.ref.index ) == trit::one )
      base += w.weight;
  }
  std::vector<uint8_t> outs( uint64_t( 1 ) << b );
  for ( uint64_t m = 0; m < outs.size(); ++m )
  {
    bigint sum = base;
    for ( uint32_t j = 0; j < b; ++j )
      if ( ( m >> j ) & 1 )
        sum += fw[j];
    bool v;
    if ( threshold_kind )
    {
      v = sum >= g.threshold;
    }
    else
    {
      int p = g.kind == gate_kind::mod2 ? 2 : 3;
      int res = static_cast<int>( sum % p );
      if ( res < 0 )
        res += p;
      v = std::find( g.accept.begin(), g.accept.end(), res ) != g.accept.end();
    }
    outs[m] = v;
  }
  return detail::classify_table( outs, b, free_vars );
}

/*! \brief Simplifies a depth <= 3 circuit under a restriction covering its
 * primary inputs.
 *
 * Bottom-layer gates are classified with forced_single_input and replaced by
 * constants (folded into successor thresholds or accept sets) or direct
 * wires; surviving gates keep only free inputs with the fixed contribution
 * folded into the threshold. The result is a circuit over the free variables
 * (in ascending original index order) whose truth table equals the
 * restricted original; no CONST gate survives except as a constant output.
 */
inline circuit apply_restriction( const circuit& c, const restriction& rho )
{
  if ( rho.n() != c.num_inputs() )
    throw structural_error( "apply_restriction: restriction length mismatch" );
  if ( c.depth() > 3 )
    throw structural_error( "apply_restriction: circuit depth exceeds 3" );

  // free variables keep their relative order
  std::vector<uint32_t> new_index( c.num_inputs(), 0 );
  uint32_t n_free = 0;
  for ( uint32_t i = 0; i < c.num_inputs(); ++i )
    if ( rho.is_star( i ) )
      new_index[i] = n_free++;

  struct disposition
  {
    enum class tag : uint8_t
    {
      constant,
      single_wire,
      kept
    };
    tag kind = tag::constant;
    bool value = false;   // constant
    uint32_t input = 0;   // single_wire (new index)
    bool negated = false; // single_wire
    uint32_t id = 0;      // kept (id in the simplified circuit)
  };

  circuit out( n_free, c.name() );
  std::vector<disposition> dispo( c.gates().size() );

  for ( uint32_t gi = 0; gi < c.gates().size(); ++gi )
  {
    const gate& g = c.gates()[gi];
    bool bottom = c.is_bottom( gi );
    bool modular = g.kind == gate_kind::mod2 || g.kind == gate_kind::mod3;
    int p = g.kind == gate_kind::mod2 ? 2 : 3;

    // rebuild the gate over free inputs and kept gates, folding constants
    std::map<input_ref, bigint> acc;
    bigint shift = 0; // fixed contribution to the sum
    for ( const auto& w : g.wires )
    {
      if ( w.ref.is_input() )
      {
        if ( rho.is_star( w.ref.index ) )
          acc[input_ref::input( new_index[w.ref.index] )] += w.weight;
        else if ( rho.at( w.ref.index ) == trit::one )
          shift += w.weight;
      }
      else
      {
        const disposition& d = dispo[w.ref.index];
        switch ( d.kind )
        {
        case disposition::tag::constant:
          if ( d.value )
            shift += w.weight;
          break;
        case disposition::tag::single_wire:
          if ( d.negated )
          {
            shift += w.weight; // w * (1 - x_j)
            acc[input_ref::input( d.input )] -= w.weight;
          }
          else
          {
            acc[input_ref::input( d.input )] += w.weight;
          }
          break;
        case disposition::tag::kept:
          acc[input_ref::gate( d.id )] += w.weight;
          break;
        }
      }
    }

    gate rebuilt;
    rebuilt.kind = g.kind;
    for ( auto& [ref, weight] : acc )
      if ( weight != 0 )
        rebuilt.wires.push_back( { ref, weight } );
    if ( modular )
    {
      int k = static_cast<int>( shift % p );
      rebuilt.accept.reserve( g.accept.size() );
      for ( int r : g.accept )
        rebuilt.accept.push_back( ( ( r - k ) % p + p ) % p );
      std::sort( rebuilt.accept.begin(), rebuilt.accept.end() );
    }
    else
    {
      rebuilt.threshold = g.threshold - shift;
    }

    // kinds whose side conditions no longer hold demote to plain LTF
    switch ( rebuilt.kind )
    {
    case gate_kind::maj:
      if ( !rebuilt.unit_weights() || rebuilt.threshold != ( bigint( rebuilt.wires.size() ) + 1 ) / 2 )
        rebuilt.kind = gate_kind::ltf;
      break;
    case gate_kind::and_gate:
      if ( !rebuilt.unit_weights() || rebuilt.threshold != bigint( rebuilt.wires.size() ) )
        rebuilt.kind = gate_kind::ltf;
      break;
    case gate_kind::or_gate:
      if ( !rebuilt.unit_weights() || rebuilt.threshold != 1 )
        rebuilt.kind = gate_kind::ltf;
      break;
    case gate_kind::constant:
      rebuilt.kind = gate_kind::ltf;
      break;
    default:
      break;
    }

    if ( bottom )
    {
      // bottom-layer gates get the full constant / single-wire classification
      restriction all_free( std::vector<trit>( n_free, trit::star ) );
      forcing_outcome fc = forced_single_input( rebuilt, all_free );
      switch ( fc.kind )
      {
      case forcing_kind::forced_zero:
        dispo[gi] = { disposition::tag::constant, false, 0, false, 0 };
        continue;
      case forcing_kind::forced_one:
        dispo[gi] = { disposition::tag::constant, true, 0, false, 0 };
        continue;
      case forcing_kind::single_input:
        dispo[gi] = { disposition::tag::single_wire, false, fc.input, fc.negated, 0 };
        continue;
      case forcing_kind::many_inputs:
        break;
      }
    }
    else if ( rebuilt.wires.empty() )
    {
      // an upper gate whose feeds all folded away is a constant
      bool value;
      if ( modular )
        value = std::find( rebuilt.accept.begin(), rebuilt.accept.end(), 0 ) != rebuilt.accept.end();
      else
        value = 0 >= rebuilt.threshold;
      dispo[gi] = { disposition::tag::constant, value, 0, false, 0 };
      continue;
    }
    dispo[gi] = { disposition::tag::kept, false, 0, false, out.add( std::move( rebuilt ) ) };
  }

  const disposition& od = dispo[c.output()];
  switch ( od.kind )
  {
  case disposition::tag::constant:
    out.set_output( out.add( make_const( od.value ) ) );
    break;
  case disposition::tag::single_wire:
  {
    std::vector<wire> ws{ { input_ref::input( od.input ), od.negated ? bigint( -1 ) : bigint( 1 ) } };
    out.set_output( out.add( make_ltf( std::move( ws ), od.negated ? 0 : 1 ) ) );
    break;
  }
  case disposition::tag::kept:
    out.set_output( od.id );
    break;
  }
  return out;
}

} // namespace ltflab
