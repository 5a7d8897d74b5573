#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "bigint.hpp"
#include "circuit.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "truth_table.hpp"

namespace ltflab
{

/*! \brief Degree <= 1 Fourier data of a Boolean function, stored exactly.
 *
 * Convention F = 1 - 2f and chi_i = 1 - 2x_i; entry 0 is 2^n * fhat(empty),
 * entry i is 2^n * fhat(i). These n+1 integers determine an LTF uniquely.
 */
struct chow_vector
{
  uint32_t n = 0;
  std::vector<int64_t> scaled;

  friend auto operator<=>( const chow_vector&, const chow_vector& ) = default;
};

inline chow_vector chow( const truth_table& tt )
{
  if ( tt.num_inputs() > 20 )
    throw capacity_error( "chow: tables above 20 inputs" );
  uint32_t n = tt.num_inputs();
  int64_t rows = int64_t( tt.num_rows() );
  chow_vector cv{ n, std::vector<int64_t>( n + 1, 0 ) };

  int64_t ones = int64_t( tt.count_ones() );
  cv.scaled[0] = rows - 2 * ones;
  for ( uint32_t j = 0; j < n; ++j )
  {
    // ones of f on the half with x_j = 1, via the block pattern of x_j
    int64_t ones1 = 0;
    const auto& words = tt.words();
    for ( size_t b = 0; b < words.size(); ++b )
      ones1 += std::popcount( words[b] & detail::input_block_word( j, uint64_t( b ) << 6 ) & tt.word_mask( b ) );
    int64_t ones0 = ones - ones1;
    // sum over x_j = 0 half minus sum over x_j = 1 half of (1 - 2f)
    cv.scaled[j + 1] = ( rows / 2 - 2 * ones0 ) - ( rows / 2 - 2 * ones1 );
  }
  return cv;
}

struct ltf_witness
{
  std::vector<int64_t> weights;
  int64_t threshold = 0;
};

/*! \brief Complete LTF enumeration for a fixed number of inputs.
 *
 * Sweeps every integer weight vector within the completeness bound
 * |w_i| <= floor((n+1)^{(n+1)/2} / 2^n) (Muroga's bound on minimal integer
 * realizations, at most 3 for n <= 4), taking each distinct weighted-sum
 * value as a threshold. Every n-input threshold function is realized inside
 * this box, so a table is an LTF iff it is marked here.
 */
struct ltf_enumeration
{
  uint32_t n = 0;
  std::vector<int32_t> witness_index;                     // per table value, -1 if not an LTF
  std::vector<std::pair<uint32_t, ltf_witness>> ltfs;     // sorted by table value

  bool is_ltf( uint32_t table_bits ) const { return witness_index[table_bits] >= 0; }
};

inline int64_t muroga_weight_bound( uint32_t n )
{
  // floor((n+1)^{(n+1)/2} / 2^n); for odd n+1 round the square root down
  long double v = std::pow( static_cast<long double>( n + 1 ), ( n + 1 ) / 2.0L ) / std::pow( 2.0L, n );
  return std::max<int64_t>( 1, static_cast<int64_t>( v ) );
}

/*! \brief Builds the enumeration; an optional seed shuffles the sweep order
 * (the resulting set must not depend on it). */
inline ltf_enumeration build_ltf_enumeration( uint32_t n, std::optional<uint64_t> shuffle_seed = {},
                                              std::optional<int64_t> weight_bound = {} )
{
  if ( n == 0 || n > 4 )
    throw capacity_error( "ltf enumeration: supported for 1 <= n <= 4" );
  int64_t B = weight_bound ? *weight_bound : muroga_weight_bound( n );
  uint32_t rows = uint32_t( 1 ) << n;

  std::vector<std::vector<int64_t>> weight_vectors;
  {
    std::vector<int64_t> w( n, -B );
    for ( ;; )
    {
      weight_vectors.push_back( w );
      uint32_t j = 0;
      while ( j < n && w[j] == B )
        w[j++] = -B;
      if ( j == n )
        break;
      ++w[j];
    }
  }
  if ( shuffle_seed )
  {
    split_rng rng( *shuffle_seed );
    for ( size_t i = weight_vectors.size(); i > 1; --i )
      std::swap( weight_vectors[i - 1], weight_vectors[rng.below( i )] );
  }

  ltf_enumeration e;
  e.n = n;
  e.witness_index.assign( uint64_t( 1 ) << rows, -1 );

  std::vector<int64_t> sums( rows );
  for ( const auto& w : weight_vectors )
  {
    for ( uint32_t x = 0; x < rows; ++x )
    {
      int64_t s = 0;
      for ( uint32_t j = 0; j < n; ++j )
        if ( ( x >> j ) & 1 )
          s += w[j];
      sums[x] = s;
    }
    std::vector<int64_t> thresholds( sums.begin(), sums.end() );
    std::sort( thresholds.begin(), thresholds.end() );
    thresholds.erase( std::unique( thresholds.begin(), thresholds.end() ), thresholds.end() );
    thresholds.push_back( thresholds.back() + 1 ); // the constant-zero cut
    for ( int64_t t : thresholds )
    {
      uint32_t bits = 0;
      for ( uint32_t x = 0; x < rows; ++x )
        bits |= uint32_t( sums[x] >= t ) << x;
      if ( e.witness_index[bits] < 0 )
      {
        e.witness_index[bits] = static_cast<int32_t>( e.ltfs.size() );
        e.ltfs.emplace_back( bits, ltf_witness{ w, t } );
      }
    }
  }
  std::sort( e.ltfs.begin(), e.ltfs.end(), []( const auto& a, const auto& b ) { return a.first < b.first; } );
  for ( size_t i = 0; i < e.ltfs.size(); ++i )
    e.witness_index[e.ltfs[i].first] = static_cast<int32_t>( i );
  return e;
}

inline const ltf_enumeration& ltf_enumeration_for( uint32_t n )
{
  static std::mutex mtx;
  static std::map<uint32_t, ltf_enumeration> cache;
  std::lock_guard<std::mutex> lock( mtx );
  auto it = cache.find( n );
  if ( it == cache.end() )
    it = cache.emplace( n, build_ltf_enumeration( n ) ).first;
  return it->second;
}

inline uint32_t table_bits( const truth_table& tt )
{
  if ( tt.num_inputs() > 4 )
    throw capacity_error( "table_bits: n <= 4 only" );
  return static_cast<uint32_t>( tt.words()[0] & tt.word_mask( 0 ) );
}

/*! \brief Decides whether a table is a linear threshold function; returns an
 * integer witness (re-verifiable by evaluation) or nothing. Exactness comes
 * from the complete bounded-weight enumeration behind it. */
inline std::optional<ltf_witness> is_ltf( const truth_table& tt )
{
  if ( tt.num_inputs() == 0 || tt.num_inputs() > 4 )
    throw capacity_error( "is_ltf: exact decision supported for 1 <= n <= 4" );
  const auto& e = ltf_enumeration_for( tt.num_inputs() );
  int32_t idx = e.witness_index[table_bits( tt )];
  if ( idx < 0 )
    return std::nullopt;
  return e.ltfs[idx].second;
}

/*! \brief All LTFs on exactly n declared inputs, keyed by truth table. */
inline std::vector<std::pair<truth_table, ltf_witness>> enumerate_ltfs( uint32_t n )
{
  const auto& e = ltf_enumeration_for( n );
  std::vector<std::pair<truth_table, ltf_witness>> out;
  out.reserve( e.ltfs.size() );
  for ( const auto& [bits, w] : e.ltfs )
  {
    truth_table tt( n );
    tt.words()[0] = bits;
    out.emplace_back( std::move( tt ), w );
  }
  return out;
}

/*! \brief A depth-two instance: LTF top gate over s bottom gates on n inputs. */
struct depth2_instance
{
  std::vector<gate> bottoms;
  std::vector<bigint> top_weights;
  bigint top_threshold = 0;
};

/*! \brief The (|S(g)|, Sigma(g)) signature of the top gate over the image of
 * the bottom layer: S(g) collects the reachable bottom-output patterns the
 * top gate accepts, Sigma(g) their componentwise integer sum. */
struct depth2_signature
{
  uint32_t s = 0;
  uint64_t set_size = 0;
  std::vector<uint64_t> sigma;

  friend bool operator==( const depth2_signature&, const depth2_signature& ) = default;
};

namespace detail
{

inline std::vector<truth_table> bottom_tables( const depth2_instance& inst, uint32_t n )
{
  std::vector<truth_table> tables;
  for ( const auto& g : inst.bottoms )
  {
    circuit c( n );
    c.set_output( c.add( g ) );
    tables.push_back( c.table() );
  }
  return tables;
}

} // namespace detail

inline depth2_signature depth2_signature_of( const depth2_instance& inst, uint32_t n )
{
  uint32_t s = static_cast<uint32_t>( inst.bottoms.size() );
  if ( n > 16 || s > 16 )
    throw capacity_error( "depth2_signature: n <= 16 and s <= 16" );
  if ( inst.top_weights.size() != s )
    throw structural_error( "depth2_signature: top weight count mismatch" );

  auto tables = detail::bottom_tables( inst, n );
  std::vector<uint8_t> in_image( uint64_t( 1 ) << s, 0 );
  uint64_t rows = uint64_t( 1 ) << n;
  for ( uint64_t x = 0; x < rows; ++x )
  {
    uint32_t y = 0;
    for ( uint32_t i = 0; i < s; ++i )
      y |= uint32_t( tables[i].get( x ) ) << i;
    in_image[y] = 1;
  }

  depth2_signature sig;
  sig.s = s;
  sig.sigma.assign( s, 0 );
  for ( uint64_t y = 0; y < in_image.size(); ++y )
  {
    if ( !in_image[y] )
      continue;
    bigint sum = 0;
    for ( uint32_t i = 0; i < s; ++i )
      if ( ( y >> i ) & 1 )
        sum += inst.top_weights[i];
    if ( sum >= inst.top_threshold )
    {
      ++sig.set_size;
      for ( uint32_t i = 0; i < s; ++i )
        if ( ( y >> i ) & 1 )
          ++sig.sigma[i];
    }
  }
  return sig;
}

/*! \brief Truth table of the composed function g(f_1, ..., f_s). */
inline truth_table depth2_composed_table( const depth2_instance& inst, uint32_t n )
{
  circuit c( n );
  std::vector<wire> top;
  for ( uint32_t i = 0; i < inst.bottoms.size(); ++i )
  {
    uint32_t id = c.add( inst.bottoms[i] );
    if ( inst.top_weights[i] != 0 )
      top.push_back( { input_ref::gate( id ), inst.top_weights[i] } );
  }
  c.set_output( c.add( make_ltf( std::move( top ), inst.top_threshold ) ) );
  return c.table();
}

} // namespace ltflab
