#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"

namespace ltflab
{

/*! \brief k-bit multiplexer: selects x_{bin(a)} where bin(a_1...a_k) reads
 * a_1 as the most significant bit and bin(0^k) = 1 (so the all-zero address
 * selects the first x bit). */
inline bool multiplexer_eval( const std::vector<uint8_t>& x, const std::vector<uint8_t>& a )
{
  if ( a.size() > 60 || x.size() != ( uint64_t( 1 ) << a.size() ) )
    throw structural_error( "multiplexer: |x| must equal 2^|a|" );
  uint64_t idx = 0;
  for ( size_t i = 0; i < a.size(); ++i )
    idx = ( idx << 1 ) | ( a[i] ? 1 : 0 );
  return x[idx] != 0;
}

/*! \brief Input layout of the Andreev function on n = 2^{k+1} bits.
 *
 * The selectable bits x occupy input indices [0, 2^k); the address half a
 * occupies [2^k, 2^{k+1}) and is split into k contiguous blocks of
 * near-equal size (sizes differ by at most one when k does not divide 2^k).
 * Block i's parity is address bit z_{i+1}, with z_1 the most significant
 * multiplexer address bit.
 */
struct andreev_layout
{
  uint32_t n = 0;
  uint32_t k = 0;
  std::vector<uint64_t> block_masks;                    // one mask per block
  std::vector<std::vector<uint32_t>> blocks;            // variable indices per block

  uint32_t x_size() const { return n / 2; }
};

inline andreev_layout make_andreev_layout( uint64_t n )
{
  if ( n < 4 || n > 64 || ( n & ( n - 1 ) ) != 0 )
    throw structural_error( "andreev: n must be a power of two in [4, 64]" );
  andreev_layout L;
  L.n = static_cast<uint32_t>( n );
  L.k = static_cast<uint32_t>( std::bit_width( n ) - 2 ); // n = 2^{k+1}
  uint32_t half = L.n / 2;
  uint32_t base = half / L.k;
  uint32_t extra = half % L.k;
  uint32_t pos = half;
  for ( uint32_t i = 0; i < L.k; ++i )
  {
    uint32_t size = base + ( i < extra ? 1 : 0 );
    std::vector<uint32_t> blk;
    uint64_t mask = 0;
    for ( uint32_t j = 0; j < size; ++j, ++pos )
    {
      blk.push_back( pos );
      mask |= uint64_t( 1 ) << pos;
    }
    L.blocks.push_back( std::move( blk ) );
    L.block_masks.push_back( mask );
  }
  return L;
}

/*! \brief Direct evaluator of the Andreev function; the oracle every circuit
 * builder below is checked against. Bit j of the argument is input x_j. */
inline bool andreev_eval( const andreev_layout& L, uint64_t bits )
{
  uint64_t idx = 0;
  for ( uint32_t i = 0; i < L.k; ++i )
    idx = ( idx << 1 ) | ( std::popcount( bits & L.block_masks[i] ) & 1u );
  return ( bits >> idx ) & 1;
}

inline bool andreev_eval( uint64_t n, uint64_t bits )
{
  return andreev_eval( make_andreev_layout( n ), bits );
}

/*! \brief Two-layer threshold circuit agreeing with the even-weight parity
 * indicator on every input whose Hamming weight lies within c*sqrt(n) of n/2.
 *
 * Bottom gates are threshold-at-least-j gates L_j; for every even k in the
 * window the top gate adds L_k - L_{k+1}, so it fires exactly when the input
 * weight is an even number inside the window. O(sqrt(n)) gates and
 * O(n^{3/2}) wires.
 */
inline circuit parity_approx_circuit( uint32_t n, uint32_t c )
{
  if ( n < 4 )
    throw structural_error( "parity_approx: n >= 4 required" );
  // window bounds [ceil(n/2 - c*sqrt(n)), floor(n/2 + c*sqrt(n))], exact integer arithmetic
  auto below_upper = [&]( int64_t h ) { // h <= n/2 + c*sqrt(n) ?
    if ( 2 * h <= int64_t( n ) )
      return true;
    int64_t d = 2 * h - int64_t( n );
    return d * d <= int64_t( 4 ) * c * c * n;
  };
  auto above_lower = [&]( int64_t l ) { // l >= n/2 - c*sqrt(n) ?
    if ( 2 * l >= int64_t( n ) )
      return true;
    int64_t d = int64_t( n ) - 2 * l;
    return d * d <= int64_t( 4 ) * c * c * n;
  };
  int64_t lo = 0;
  while ( !above_lower( lo ) )
    ++lo;
  int64_t hi = n;
  while ( !below_upper( hi ) )
    --hi;

  circuit cc( n, "parity_approx_n" + std::to_string( n ) + "_c" + std::to_string( c ) );
  std::vector<input_ref> all;
  for ( uint32_t j = 0; j < n; ++j )
    all.push_back( input_ref::input( j ) );

  auto add_threshold_gate = [&]( int64_t j ) {
    std::vector<wire> ws;
    for ( auto r : all )
      ws.push_back( { r, 1 } );
    return cc.add( make_ltf( std::move( ws ), j ) );
  };

  std::vector<wire> top;
  bigint top_t = 1;
  for ( int64_t k = lo + ( lo % 2 != 0 ? 1 : 0 ); k <= hi; k += 2 )
  {
    if ( k == 0 )
      top_t -= 1; // L_0 is identically one
    else
      top.push_back( { input_ref::gate( add_threshold_gate( k ) ), 1 } );
    if ( k + 1 <= int64_t( n ) )
      top.push_back( { input_ref::gate( add_threshold_gate( k + 1 ) ), -1 } );
  }
  cc.set_output( cc.add( make_ltf( std::move( top ), top_t ) ) );
  return cc;
}

namespace detail
{

/*! \brief Adds L_1..L_m over the given variables; the alternating sum
 * L_1 - L_2 + L_3 - ... equals the parity of those variables. */
inline std::vector<uint32_t> add_parity_ladder( circuit& c, const std::vector<uint32_t>& vars )
{
  std::vector<uint32_t> ids;
  for ( size_t j = 1; j <= vars.size(); ++j )
  {
    std::vector<wire> ws;
    for ( uint32_t v : vars )
      ws.push_back( { input_ref::input( v ), 1 } );
    ids.push_back( c.add( make_ltf( std::move( ws ), bigint( j ) ) ) );
  }
  return ids;
}

inline std::vector<uint32_t> mask_to_vars( uint64_t mask )
{
  std::vector<uint32_t> vars;
  for ( uint32_t v = 0; v < 64; ++v )
    if ( ( mask >> v ) & 1 )
      vars.push_back( v );
  return vars;
}

} // namespace detail

/*! \brief Depth-three circuit for the Andreev function with O(n) gates.
 *
 * Each address block's parity is realized by a ladder of threshold gates
 * whose alternating sum is the parity; the per-address AND blocks fold those
 * sums directly into one +-1-weight threshold gate each, and the output is
 * an OR over the 2^k AND blocks. All weights lie in {-1, +1}.
 */
inline circuit andreev_tc03_circuit( uint64_t n )
{
  andreev_layout L = make_andreev_layout( n );
  circuit c( L.n, "andreev_tc03_n" + std::to_string( n ) );

  std::vector<std::vector<uint32_t>> ladders;
  for ( const auto& blk : L.blocks )
    ladders.push_back( detail::add_parity_ladder( c, blk ) );

  std::vector<input_ref> ands;
  for ( uint64_t p = 0; p < ( uint64_t( 1 ) << L.k ); ++p )
  {
    // address bits p_1..p_k with p_1 most significant
    std::vector<wire> ws;
    int zeros = 0;
    uint32_t xvar = 0;
    for ( uint32_t i = 0; i < L.k; ++i )
    {
      int pi = ( p >> ( L.k - 1 - i ) ) & 1;
      xvar = ( xvar << 1 ) | pi;
      int s = pi ? 1 : -1;
      if ( !pi )
        ++zeros;
      const auto& ladder = ladders[i];
      for ( size_t j = 0; j < ladder.size(); ++j )
        ws.push_back( { input_ref::gate( ladder[j] ), ( j % 2 == 0 ? s : -s ) } );
    }
    ws.push_back( { input_ref::input( xvar ), 1 } );
    ands.push_back( input_ref::gate( c.add( make_ltf( std::move( ws ), bigint( L.k ) + 1 - zeros ) ) ) );
  }
  c.set_output( c.add( make_or( ands ) ) );
  return c;
}

/*! \brief Character expansion of the Andreev function: integer coefficients
 * over +-1 characters chi_V, keyed by the variable-set mask V. Satisfies
 * sum_V coeff[V] * chi_V(x) = 2^{k+1} * A_n(x). */
inline std::map<uint64_t, int64_t> andreev_character_expansion( const andreev_layout& L )
{
  std::map<uint64_t, int64_t> coeff;
  for ( uint64_t p = 0; p < ( uint64_t( 1 ) << L.k ); ++p )
  {
    uint32_t xvar = 0;
    std::vector<int> sigma( L.k );
    for ( uint32_t i = 0; i < L.k; ++i )
    {
      int pi = ( p >> ( L.k - 1 - i ) ) & 1;
      xvar = ( xvar << 1 ) | pi;
      sigma[i] = 1 - 2 * pi;
    }
    // AND of k+1 bits expanded over subsets S of {x factor} x {blocks}
    for ( uint64_t s = 0; s < ( uint64_t( 1 ) << ( L.k + 1 ) ); ++s )
    {
      int sign = ( std::popcount( s ) & 1 ) ? -1 : 1;
      uint64_t vmask = 0;
      if ( s & 1 )
        vmask |= uint64_t( 1 ) << xvar; // B_0 = chi of the selected x bit
      for ( uint32_t i = 0; i < L.k; ++i )
        if ( ( s >> ( i + 1 ) ) & 1 )
        {
          sign *= -sigma[i]; // B_i = -sigma_i * chi_{block i}
          vmask ^= L.block_masks[i];
        }
      coeff[vmask] += sign;
    }
  }
  std::erase_if( coeff, []( const auto& kv ) { return kv.second == 0; } );
  return coeff;
}

struct ltf2_build
{
  circuit c;
  /*! \brief Per parity subcircuit: the character's variable mask and the
   * ladder gate ids whose alternating sum is the parity of those variables. */
  std::vector<std::pair<uint64_t, std::vector<uint32_t>>> parity_ladders;
};

/*! \brief Depth-two LTF circuit for the Andreev function.
 *
 * The OR of the per-address ANDs becomes a single threshold test over +-1
 * characters (dyadic coefficients cleared by the 2^{k+1} scale of the
 * (k+1)-bit AND expansion). Every character over two or more variables is
 * realized by a parity ladder whose +-1-valued contribution merges into the
 * top gate; single-variable characters wire the input directly.
 */
inline ltf2_build andreev_ltf2_detail( uint64_t n, uint64_t max_gates = 20000 )
{
  andreev_layout L = make_andreev_layout( n );
  auto coeff = andreev_character_expansion( L );

  uint64_t planned = 1;
  for ( const auto& [vmask, cv] : coeff )
    if ( std::popcount( vmask ) >= 2 )
      planned += std::popcount( vmask );
  if ( planned > max_gates )
    throw capacity_error( "andreev_ltf2: construction needs " + std::to_string( planned ) + " gates" );

  ltf2_build out{ circuit( L.n, "andreev_ltf2_n" + std::to_string( n ) ), {} };
  circuit& c = out.c;

  std::vector<wire> top;
  bigint top_t = bigint( 1 ) << ( L.k + 1 );
  for ( const auto& [vmask, cv] : coeff )
  {
    int weight_count = std::popcount( vmask );
    if ( weight_count == 0 )
    {
      top_t -= cv; // constant character
      continue;
    }
    top_t -= cv; // chi_V = 1 - 2*parity contributes its +1 part here
    if ( weight_count == 1 )
    {
      top.push_back( { input_ref::input( static_cast<uint32_t>( std::countr_zero( vmask ) ) ), bigint( -2 * cv ) } );
      continue;
    }
    auto ladder = detail::add_parity_ladder( c, detail::mask_to_vars( vmask ) );
    for ( size_t j = 0; j < ladder.size(); ++j )
      top.push_back( { input_ref::gate( ladder[j] ), bigint( ( j % 2 == 0 ? -2 : 2 ) * cv ) } );
    out.parity_ladders.emplace_back( vmask, std::move( ladder ) );
  }
  c.set_output( c.add( make_ltf( std::move( top ), std::move( top_t ) ) ) );
  return out;
}

inline circuit andreev_ltf2_circuit( uint64_t n, uint64_t max_gates = 20000 )
{
  return andreev_ltf2_detail( n, max_gates ).c;
}

/*! \brief Parity decision tree: internal nodes query the parity of a subset
 * of inputs, leaves output a constant. */
class parity_decision_tree
{
public:
  static constexpr int32_t leaf_zero = -1;
  static constexpr int32_t leaf_one = -2;

  struct node
  {
    uint64_t query;   // nonempty variable mask
    int32_t child[2]; // node index, or leaf_zero / leaf_one
  };

  parity_decision_tree( uint32_t num_inputs, std::vector<node> nodes, int32_t root )
      : num_inputs_( num_inputs ), nodes_( std::move( nodes ) ), root_( root )
  {
    for ( const auto& nd : nodes_ )
      if ( nd.query == 0 )
        throw structural_error( "parity_decision_tree: empty query" );
    depth_ = measure( root_ );
  }

  uint32_t num_inputs() const { return num_inputs_; }
  uint32_t depth() const { return depth_; }
  const std::vector<node>& nodes() const { return nodes_; }

  bool eval( uint64_t bits ) const
  {
    int32_t cur = root_;
    while ( cur >= 0 )
    {
      const node& nd = nodes_[cur];
      cur = nd.child[std::popcount( bits & nd.query ) & 1];
    }
    return cur == leaf_one;
  }

  /*! \brief The query masks asked along the evaluation path. */
  std::vector<uint64_t> trace( uint64_t bits ) const
  {
    std::vector<uint64_t> path;
    int32_t cur = root_;
    while ( cur >= 0 )
    {
      const node& nd = nodes_[cur];
      path.push_back( nd.query );
      cur = nd.child[std::popcount( bits & nd.query ) & 1];
    }
    return path;
  }

private:
  uint32_t measure( int32_t id ) const
  {
    if ( id < 0 )
      return 0;
    return 1 + std::max( measure( nodes_[id].child[0] ), measure( nodes_[id].child[1] ) );
  }

  uint32_t num_inputs_;
  std::vector<node> nodes_;
  int32_t root_;
  uint32_t depth_ = 0;
};

/*! \brief Depth k+1 parity decision tree for the Andreev function: one query
 * per address block, then a singleton query on the selected x bit. */
inline parity_decision_tree andreev_pdt( uint64_t n )
{
  andreev_layout L = make_andreev_layout( n );
  std::vector<parity_decision_tree::node> nodes;

  // build subtree after observing address prefix z (level = bits observed)
  auto build = [&]( auto&& self, uint32_t level, uint32_t z ) -> int32_t {
    if ( level == L.k )
    {
      nodes.push_back( { uint64_t( 1 ) << z,
                         { parity_decision_tree::leaf_zero, parity_decision_tree::leaf_one } } );
      return static_cast<int32_t>( nodes.size() - 1 );
    }
    int32_t c0 = self( self, level + 1, ( z << 1 ) | 0 );
    int32_t c1 = self( self, level + 1, ( z << 1 ) | 1 );
    nodes.push_back( { L.block_masks[level], { c0, c1 } } );
    return static_cast<int32_t>( nodes.size() - 1 );
  };
  int32_t root = build( build, 0, 0 );
  return parity_decision_tree( L.n, std::move( nodes ), root );
}

/*! \brief F3 polynomial over +-1 characters: coefficient in {0,1,2} per
 * variable-set mask. Designed so the value is 0 mod 3 exactly on inputs
 * where the Andreev function is 1. */
struct mod3_poly
{
  std::map<uint64_t, int> coeff; // mask -> coefficient mod 3, zero entries dropped

  uint64_t monomial_count() const { return coeff.size(); }

  int eval( uint64_t bits ) const
  {
    int acc = 0;
    for ( const auto& [mask, cv] : coeff )
    {
      int chi = ( std::popcount( bits & mask ) & 1 ) ? -1 : 1; // +-1 character
      acc = ( ( acc + cv * chi ) % 3 + 3 ) % 3;
    }
    return acc;
  }
};

inline mod3_poly andreev_mod3_poly( const andreev_layout& L )
{
  auto chars = andreev_character_expansion( L );
  // 2^{k+1} * A_n = sum coeff * chi; over F3 divide by 2^{k+1} (2 inverts to 2)
  int inv = ( ( L.k + 1 ) % 2 ) ? 2 : 1;
  mod3_poly p;
  for ( const auto& [mask, cv] : chars )
  {
    int m = static_cast<int>( ( ( cv * inv ) % 3 + 3 ) % 3 );
    if ( m )
      p.coeff[mask] = m;
  }
  // subtract 1 so the polynomial vanishes exactly where A_n = 1
  int c0 = ( ( p.coeff.count( 0 ) ? p.coeff[0] : 0 ) + 2 ) % 3;
  if ( c0 )
    p.coeff[0] = c0;
  else
    p.coeff.erase( 0 );
  return p;
}

struct mod3mod2_build
{
  circuit c;
  mod3_poly poly;
};

/*! \brief MOD3-of-MOD2 circuit for the Andreev function: one MOD2 gate per
 * nonconstant monomial, a zero-accepting MOD3 on top; the constant term
 * rides on a CONST-1 gate so the top gate keeps its accept set {0}. */
inline mod3mod2_build andreev_mod3mod2_detail( uint64_t n )
{
  andreev_layout L = make_andreev_layout( n );
  mod3_poly p = andreev_mod3_poly( L );

  circuit c( L.n, "andreev_mod3mod2_n" + std::to_string( n ) );
  std::vector<wire> top;
  // chi_V = 1 - 2 z_V with z_V the 0/1 parity; mod 3 the -2 becomes +1,
  // so each monomial contributes its coefficient on the parity gate plus
  // the same amount to the constant.
  int constant = 0;
  for ( const auto& [mask, cv] : p.coeff )
  {
    if ( mask == 0 )
    {
      constant = ( constant + cv ) % 3;
      continue;
    }
    std::vector<wire> ws;
    for ( uint32_t v : detail::mask_to_vars( mask ) )
      ws.push_back( { input_ref::input( v ), 1 } );
    uint32_t id = c.add( make_mod2( std::move( ws ), { 1 } ) );
    top.push_back( { input_ref::gate( id ), cv } );
    constant = ( constant + cv ) % 3;
  }
  if ( constant )
  {
    uint32_t one = c.add( make_const( true ) );
    top.push_back( { input_ref::gate( one ), constant } );
  }
  c.set_output( c.add( make_mod3( std::move( top ), { 0 } ) ) );
  return { std::move( c ), std::move( p ) };
}

inline circuit andreev_mod3mod2( uint64_t n )
{
  return andreev_mod3mod2_detail( n ).c;
}

} // namespace ltflab
