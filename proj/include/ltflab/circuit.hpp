#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "truth_table.hpp"

namespace ltflab
{

enum class gate_kind : uint8_t
{
  ltf,
  maj,
  and_gate,
  or_gate,
  mod2,
  mod3,
  constant
};

inline const char* kind_name( gate_kind k )
{
  switch ( k )
  {
  case gate_kind::ltf: return "LTF";
  case gate_kind::maj: return "MAJ";
  case gate_kind::and_gate: return "AND";
  case gate_kind::or_gate: return "OR";
  case gate_kind::mod2: return "MOD2";
  case gate_kind::mod3: return "MOD3";
  case gate_kind::constant: return "CONST";
  }
  return "?";
}

/*! \brief A gate input: primary input x_j or the output of an earlier gate. */
struct input_ref
{
  enum class tag : uint8_t
  {
    input,
    gate
  };

  tag kind;
  uint32_t index;

  static input_ref input( uint32_t j ) { return { tag::input, j }; }
  static input_ref gate( uint32_t g ) { return { tag::gate, g }; }

  bool is_input() const { return kind == tag::input; }
  bool is_gate() const { return kind == tag::gate; }

  friend auto operator<=>( const input_ref&, const input_ref& ) = default;
};

struct wire
{
  input_ref ref;
  bigint weight;
};

/*! \brief One gate: a weighted sum of inputs tested against a threshold, or
 * reduced modulo 2/3 against an accept set of residues.
 *
 * Semantics by kind (sum = exact integer \f$\sum w_i \cdot b_i\f$):
 *   - LTF / MAJ / AND / OR / CONST: outputs [sum >= threshold]; MAJ requires
 *     unit weights and threshold ceil(fanin/2), AND/OR unit weights with
 *     threshold fanin/1, CONST has no wires (value is [0 >= threshold]).
 *   - MOD2 / MOD3: outputs [sum mod p in accept], mathematical mod in [0, p).
 *
 * Wires are kept sorted by reference with no duplicates; zero-weight wires
 * are dropped at construction so wire counts are well defined.
 */
struct gate
{
  gate_kind kind = gate_kind::constant;
  std::vector<wire> wires;
  bigint threshold = 0;
  std::vector<int> accept;

  uint32_t fan_in() const { return static_cast<uint32_t>( wires.size() ); }

  bool unit_weights() const
  {
    for ( const auto& w : wires )
      if ( w.weight != 1 )
        return false;
    return true;
  }
};

namespace detail
{

inline void normalize_wires( std::vector<wire>& wires )
{
  std::erase_if( wires, []( const wire& w ) { return w.weight == 0; } );
  std::sort( wires.begin(), wires.end(), []( const wire& a, const wire& b ) { return a.ref < b.ref; } );
  for ( size_t i = 1; i < wires.size(); ++i )
    if ( wires[i - 1].ref == wires[i].ref )
      throw structural_error( "gate: duplicate input reference" );
}

inline void normalize_accept( std::vector<int>& accept, int p )
{
  for ( int r : accept )
    if ( r < 0 || r >= p )
      throw structural_error( "gate: accept residue out of range" );
  std::sort( accept.begin(), accept.end() );
  accept.erase( std::unique( accept.begin(), accept.end() ), accept.end() );
}

} // namespace detail

inline gate make_ltf( std::vector<wire> wires, bigint threshold )
{
  detail::normalize_wires( wires );
  return gate{ gate_kind::ltf, std::move( wires ), std::move( threshold ), {} };
}

/*! \brief Unit weights, threshold ceil(fanin/2). */
inline gate make_maj( const std::vector<input_ref>& refs )
{
  std::vector<wire> ws;
  ws.reserve( refs.size() );
  for ( auto r : refs )
    ws.push_back( { r, 1 } );
  detail::normalize_wires( ws );
  bigint t = ( bigint( ws.size() ) + 1 ) / 2;
  return gate{ gate_kind::maj, std::move( ws ), std::move( t ), {} };
}

inline gate make_and( const std::vector<input_ref>& refs )
{
  std::vector<wire> ws;
  for ( auto r : refs )
    ws.push_back( { r, 1 } );
  detail::normalize_wires( ws );
  bigint t = ws.size();
  return gate{ gate_kind::and_gate, std::move( ws ), std::move( t ), {} };
}

inline gate make_or( const std::vector<input_ref>& refs )
{
  std::vector<wire> ws;
  for ( auto r : refs )
    ws.push_back( { r, 1 } );
  detail::normalize_wires( ws );
  return gate{ gate_kind::or_gate, std::move( ws ), 1, {} };
}

inline gate make_mod2( std::vector<wire> wires, std::vector<int> accept )
{
  detail::normalize_wires( wires );
  detail::normalize_accept( accept, 2 );
  return gate{ gate_kind::mod2, std::move( wires ), 0, std::move( accept ) };
}

inline gate make_mod3( std::vector<wire> wires, std::vector<int> accept )
{
  detail::normalize_wires( wires );
  detail::normalize_accept( accept, 3 );
  return gate{ gate_kind::mod3, std::move( wires ), 0, std::move( accept ) };
}

inline gate make_const( bool value )
{
  return gate{ gate_kind::constant, {}, value ? 0 : 1, {} };
}

/*! \brief Standalone LTF over primary inputs from a dense weight vector. */
inline gate ltf_over_inputs( const std::vector<bigint>& weights, bigint threshold )
{
  std::vector<wire> ws;
  for ( uint32_t j = 0; j < weights.size(); ++j )
    if ( weights[j] != 0 )
      ws.push_back( { input_ref::input( j ), weights[j] } );
  return make_ltf( std::move( ws ), std::move( threshold ) );
}

/*! \brief MAJ over the first n primary inputs. */
inline gate maj_over_inputs( uint32_t n )
{
  std::vector<input_ref> refs;
  refs.reserve( n );
  for ( uint32_t j = 0; j < n; ++j )
    refs.push_back( input_ref::input( j ) );
  return make_maj( refs );
}

/*! \brief Evaluates one gate on an assignment covering all its references.
 *
 * The assignment supplies bits for primary inputs; gate references are looked
 * up in gate_values (outputs of earlier gates), which may be empty for gates
 * reading primary inputs only.
 */
inline bool eval_gate( const gate& g, const std::vector<uint8_t>& assignment,
                       const std::vector<uint8_t>& gate_values = {} )
{
  bigint sum = 0;
  for ( const auto& w : g.wires )
  {
    bool b;
    if ( w.ref.is_input() )
    {
      if ( w.ref.index >= assignment.size() )
        throw structural_error( "eval_gate: assignment does not cover input x" + std::to_string( w.ref.index ) );
      b = assignment[w.ref.index] != 0;
    }
    else
    {
      if ( w.ref.index >= gate_values.size() )
        throw structural_error( "eval_gate: undefined gate reference" );
      b = gate_values[w.ref.index] != 0;
    }
    if ( b )
      sum += w.weight;
  }
  switch ( g.kind )
  {
  case gate_kind::mod2:
  case gate_kind::mod3:
  {
    int p = g.kind == gate_kind::mod2 ? 2 : 3;
    int res = static_cast<int>( sum % p );
    if ( res < 0 )
      res += p;
    return std::find( g.accept.begin(), g.accept.end(), res ) != g.accept.end();
  }
  default:
    return sum >= g.threshold;
  }
}

namespace detail
{

inline uint64_t input_block_word( uint32_t j, uint64_t base )
{
  static constexpr uint64_t pat[6] = {
      0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
      0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull };
  if ( j < 6 )
    return pat[j];
  return ( ( base >> j ) & 1 ) ? ~uint64_t( 0 ) : 0;
}

/*! \brief 64 parallel small counters, one bit-plane per binary digit. */
class vertical_counter
{
public:
  explicit vertical_counter( unsigned bits )
      : planes_( bits, 0 )
  {
  }

  void reset() { std::fill( planes_.begin(), planes_.end(), 0 ); }

  void add( uint64_t word )
  {
    uint64_t carry = word;
    for ( auto& p : planes_ )
    {
      uint64_t o = p;
      p = o ^ carry;
      carry &= o;
      if ( !carry )
        break;
    }
  }

  /*! \brief Lanes whose count is >= threshold. */
  uint64_t at_least( uint64_t threshold ) const
  {
    if ( threshold == 0 )
      return ~uint64_t( 0 );
    if ( threshold >> planes_.size() )
      return 0;
    uint64_t ge = 0, eq = ~uint64_t( 0 );
    for ( size_t i = planes_.size(); i-- > 0; )
    {
      if ( ( threshold >> i ) & 1 )
        eq &= planes_[i];
      else
      {
        ge |= eq & planes_[i];
        eq &= ~planes_[i];
      }
    }
    return ge | eq;
  }

private:
  std::vector<uint64_t> planes_;
};

inline void mod3_inc( uint64_t& r1, uint64_t& r2, uint64_t mask )
{
  uint64_t n1 = ( ~mask & r1 ) | ( mask & ~( r1 | r2 ) );
  uint64_t n2 = ( ~mask & r2 ) | ( mask & r1 );
  r1 = n1;
  r2 = n2;
}

} // namespace detail

/*! \brief A layered DAG of gates in topological order with one designated
 * output.
 *
 * Gates are appended with add(); every wire must reference a primary input in
 * range or a previously added gate, which makes the gate list topologically
 * ordered by construction. Instances are treated as immutable once built;
 * all query methods are const and safe for concurrent readers.
 */
class circuit
{
public:
  explicit circuit( uint32_t num_inputs, std::string name = "c" )
      : num_inputs_( num_inputs ), name_( std::move( name ) )
  {
  }

  uint32_t num_inputs() const { return num_inputs_; }
  const std::string& name() const { return name_; }
  void set_name( std::string name ) { name_ = std::move( name ); }

  const std::vector<gate>& gates() const { return gates_; }
  const gate& gate_at( uint32_t i ) const { return gates_[i]; }

  uint32_t add( gate g )
  {
    validate_gate( g );
    gates_.push_back( std::move( g ) );
    return static_cast<uint32_t>( gates_.size() - 1 );
  }

  void set_output( uint32_t id )
  {
    if ( id >= gates_.size() )
      throw structural_error( "circuit: output gate does not exist" );
    output_ = id;
    has_output_ = true;
  }

  uint32_t output() const
  {
    if ( !has_output_ )
      throw structural_error( "circuit: no output gate designated" );
    return output_;
  }

  bool has_output() const { return has_output_; }

  /*! \brief Number of non-CONST gates. */
  uint64_t gate_count() const
  {
    uint64_t c = 0;
    for ( const auto& g : gates_ )
      if ( g.kind != gate_kind::constant )
        ++c;
    return c;
  }

  /*! \brief Number of weighted edges, including edges from primary inputs. */
  uint64_t wire_count() const
  {
    uint64_t c = 0;
    for ( const auto& g : gates_ )
      c += g.wires.size();
    return c;
  }

  /*! \brief Layer per gate: 1 + max layer over gate references (inputs sit at
   * layer 0), so a gate reading only primary inputs is at layer 1. */
  std::vector<uint32_t> layers() const
  {
    std::vector<uint32_t> layer( gates_.size(), 1 );
    for ( size_t i = 0; i < gates_.size(); ++i )
      for ( const auto& w : gates_[i].wires )
        if ( w.ref.is_gate() )
          layer[i] = std::max( layer[i], layer[w.ref.index] + 1 );
    return layer;
  }

  uint32_t depth() const
  {
    auto layer = layers();
    uint32_t d = 0;
    for ( auto l : layer )
      d = std::max( d, l );
    return d;
  }

  /*! \brief True if the gate reads primary inputs only. */
  bool is_bottom( uint32_t id ) const
  {
    for ( const auto& w : gates_[id].wires )
      if ( w.ref.is_gate() )
        return false;
    return true;
  }

  /*! \brief Evaluates every gate in topological order; returns all outputs. */
  std::vector<uint8_t> eval_all( const std::vector<uint8_t>& assignment ) const
  {
    if ( assignment.size() != num_inputs_ )
      throw structural_error( "circuit: assignment length mismatch" );
    std::vector<uint8_t> values( gates_.size(), 0 );
    for ( size_t i = 0; i < gates_.size(); ++i )
      values[i] = eval_gate( gates_[i], assignment, values ) ? 1 : 0;
    return values;
  }

  bool eval( const std::vector<uint8_t>& assignment ) const
  {
    return eval_all( assignment )[output()] != 0;
  }

  /*! \brief Pointwise evaluation with the assignment packed as bits of a word
   * (x_0 is the least significant bit); requires num_inputs <= 64. */
  bool eval_bits( uint64_t bits ) const
  {
    std::vector<uint8_t> a( num_inputs_ );
    for ( uint32_t j = 0; j < num_inputs_; ++j )
      a[j] = ( bits >> j ) & 1;
    return eval( a );
  }

  /*! \brief Full table over 2^n assignments, 64 assignments per pass.
   *
   * Unit- and small-weight gates are evaluated with bit-sliced counters
   * (AND/OR/MOD2 as plain word logic, MOD3 with two residue planes); gates
   * with large weights fall back to per-lane exact sums.
   */
  truth_table table() const
  {
    if ( num_inputs_ > truth_table::max_inputs )
      throw capacity_error( "circuit: table over " + std::to_string( num_inputs_ ) + " inputs" );
    uint32_t out = output();

    std::vector<block_plan> plans;
    plans.reserve( gates_.size() );
    unsigned max_counter_bits = 1;
    for ( const auto& g : gates_ )
    {
      plans.push_back( make_plan( g ) );
      if ( plans.back().path == plan_path::counter )
        max_counter_bits = std::max( max_counter_bits, plans.back().counter_bits );
    }

    truth_table tt( num_inputs_ );
    uint64_t rows = tt.num_rows();
    uint64_t n_blocks = ( rows + 63 ) / 64;
    std::vector<uint64_t> gw( gates_.size(), 0 );
    detail::vertical_counter counter( max_counter_bits );

    for ( uint64_t b = 0; b < n_blocks; ++b )
    {
      uint64_t base = b << 6;
      for ( size_t i = 0; i < gates_.size(); ++i )
        gw[i] = eval_block( plans[i], gates_[i], base, gw, counter );
      tt.words()[b] = gw[out] & tt.word_mask( b );
    }
    return tt;
  }

private:
  enum class plan_path : uint8_t
  {
    fixed,
    word_and,
    word_or,
    word_xor,
    mod3_planes,
    counter,
    lane_i64,
    lane_big
  };

  struct block_plan
  {
    plan_path path = plan_path::fixed;
    uint64_t fixed_word = 0;
    // counter path: (wire index, invert) repeated |w| times is encoded by reps
    struct src
    {
      uint32_t wire;
      uint8_t reps;
      bool invert;
    };
    std::vector<src> sources;
    uint64_t counter_threshold = 0;
    unsigned counter_bits = 1;
    // lane paths
    std::vector<int64_t> w64;
    int64_t t64 = 0;
  };

  block_plan make_plan( const gate& g ) const
  {
    block_plan p;
    switch ( g.kind )
    {
    case gate_kind::constant:
      p.path = plan_path::fixed;
      p.fixed_word = ( 0 >= g.threshold ) ? ~uint64_t( 0 ) : 0;
      return p;
    case gate_kind::and_gate:
      p.path = plan_path::word_and;
      return p;
    case gate_kind::or_gate:
      p.path = plan_path::word_or;
      return p;
    case gate_kind::mod2:
      p.path = plan_path::word_xor;
      return p;
    case gate_kind::mod3:
      p.path = plan_path::mod3_planes;
      return p;
    case gate_kind::ltf:
    case gate_kind::maj:
      break;
    }

    bigint min_sum = 0, max_sum = 0, abs_sum = 0;
    bigint max_abs = 0;
    for ( const auto& w : g.wires )
    {
      if ( w.weight > 0 )
        max_sum += w.weight;
      else
        min_sum += w.weight;
      bigint a = abs( w.weight );
      abs_sum += a;
      if ( a > max_abs )
        max_abs = a;
    }
    if ( g.threshold <= min_sum )
    {
      p.path = plan_path::fixed;
      p.fixed_word = ~uint64_t( 0 );
      return p;
    }
    if ( g.threshold > max_sum )
    {
      p.path = plan_path::fixed;
      p.fixed_word = 0;
      return p;
    }
    if ( max_abs <= 8 && abs_sum <= 4096 )
    {
      p.path = plan_path::counter;
      bigint t = g.threshold - min_sum; // in [1, abs_sum]
      p.counter_threshold = static_cast<uint64_t>( t );
      uint64_t total = static_cast<uint64_t>( abs_sum );
      p.counter_bits = std::max<unsigned>( 1, static_cast<unsigned>( std::bit_width( total ) ) );
      for ( uint32_t i = 0; i < g.wires.size(); ++i )
      {
        const auto& w = g.wires[i];
        bool neg = w.weight < 0;
        uint8_t reps = static_cast<uint8_t>( neg ? -w.weight : w.weight );
        p.sources.push_back( { i, reps, neg } );
      }
      return p;
    }
    bigint guard = abs_sum + abs( g.threshold );
    if ( auto t = to_int64( g.threshold ); t && guard < ( bigint( 1 ) << 62 ) )
    {
      p.path = plan_path::lane_i64;
      p.t64 = *t;
      for ( const auto& w : g.wires )
        p.w64.push_back( static_cast<int64_t>( w.weight ) );
      return p;
    }
    p.path = plan_path::lane_big;
    return p;
  }

  uint64_t wire_word( const wire& w, uint64_t base, const std::vector<uint64_t>& gw ) const
  {
    return w.ref.is_input() ? detail::input_block_word( w.ref.index, base ) : gw[w.ref.index];
  }

  uint64_t eval_block( const block_plan& p, const gate& g, uint64_t base, const std::vector<uint64_t>& gw,
                       detail::vertical_counter& counter ) const
  {
    switch ( p.path )
    {
    case plan_path::fixed:
      return p.fixed_word;
    case plan_path::word_and:
    {
      uint64_t acc = ~uint64_t( 0 );
      for ( const auto& w : g.wires )
        acc &= wire_word( w, base, gw );
      return acc;
    }
    case plan_path::word_or:
    {
      uint64_t acc = 0;
      for ( const auto& w : g.wires )
        acc |= wire_word( w, base, gw );
      return acc;
    }
    case plan_path::word_xor:
    {
      uint64_t acc = 0;
      for ( const auto& w : g.wires )
        if ( ( ( w.weight % 2 ) != 0 ) )
          acc ^= wire_word( w, base, gw );
      uint64_t out = 0;
      for ( int r : g.accept )
        out |= r == 0 ? ~acc : acc;
      return out;
    }
    case plan_path::mod3_planes:
    {
      uint64_t r1 = 0, r2 = 0;
      for ( const auto& w : g.wires )
      {
        int c = static_cast<int>( w.weight % 3 );
        if ( c < 0 )
          c += 3;
        uint64_t mask = wire_word( w, base, gw );
        for ( int i = 0; i < c; ++i )
          detail::mod3_inc( r1, r2, mask );
      }
      uint64_t out = 0;
      for ( int r : g.accept )
        out |= r == 0 ? ~( r1 | r2 ) : ( r == 1 ? r1 : r2 );
      return out;
    }
    case plan_path::counter:
    {
      counter.reset();
      for ( const auto& s : p.sources )
      {
        uint64_t word = wire_word( g.wires[s.wire], base, gw );
        if ( s.invert )
          word = ~word;
        for ( unsigned i = 0; i < s.reps; ++i )
          counter.add( word );
      }
      return counter.at_least( p.counter_threshold );
    }
    case plan_path::lane_i64:
    {
      uint64_t out = 0;
      for ( unsigned lane = 0; lane < 64; ++lane )
      {
        int64_t s = 0;
        for ( uint32_t i = 0; i < g.wires.size(); ++i )
          s += p.w64[i] * static_cast<int64_t>( ( wire_word( g.wires[i], base, gw ) >> lane ) & 1 );
        out |= uint64_t( s >= p.t64 ) << lane;
      }
      return out;
    }
    case plan_path::lane_big:
    {
      uint64_t out = 0;
      for ( unsigned lane = 0; lane < 64; ++lane )
      {
        bigint s = 0;
        for ( const auto& w : g.wires )
          if ( ( wire_word( w, base, gw ) >> lane ) & 1 )
            s += w.weight;
        out |= uint64_t( s >= g.threshold ) << lane;
      }
      return out;
    }
    }
    return 0;
  }

  void validate_gate( const gate& g ) const
  {
    for ( size_t i = 0; i < g.wires.size(); ++i )
    {
      const auto& w = g.wires[i];
      if ( w.weight == 0 )
        throw structural_error( "circuit: zero-weight wire survived construction" );
      if ( i > 0 && !( g.wires[i - 1].ref < w.ref ) )
        throw structural_error( "circuit: wires not sorted/unique" );
      if ( w.ref.is_input() )
      {
        if ( w.ref.index >= num_inputs_ )
          throw structural_error( "circuit: input reference x" + std::to_string( w.ref.index ) + " out of range" );
      }
      else if ( w.ref.index >= gates_.size() )
      {
        throw structural_error( "circuit: forward or dangling gate reference" );
      }
    }
    switch ( g.kind )
    {
    case gate_kind::maj:
      if ( !g.unit_weights() || g.threshold != ( bigint( g.wires.size() ) + 1 ) / 2 )
        throw structural_error( "circuit: MAJ gate must have unit weights and threshold ceil(fanin/2)" );
      break;
    case gate_kind::and_gate:
      if ( !g.unit_weights() || g.threshold != bigint( g.wires.size() ) )
        throw structural_error( "circuit: AND gate must have unit weights and threshold = fanin" );
      break;
    case gate_kind::or_gate:
      if ( !g.unit_weights() || g.threshold != 1 )
        throw structural_error( "circuit: OR gate must have unit weights and threshold 1" );
      break;
    case gate_kind::mod2:
    case gate_kind::mod3:
    {
      int p = g.kind == gate_kind::mod2 ? 2 : 3;
      for ( int r : g.accept )
        if ( r < 0 || r >= p )
          throw structural_error( "circuit: accept residue out of range" );
      break;
    }
    case gate_kind::constant:
      if ( !g.wires.empty() )
        throw structural_error( "circuit: CONST gate cannot have wires" );
      break;
    case gate_kind::ltf:
      break;
    }
  }

  uint32_t num_inputs_;
  std::string name_;
  std::vector<gate> gates_;
  uint32_t output_ = 0;
  bool has_output_ = false;
};

/*! \brief (gate_count, wire_count) of a circuit. */
inline std::pair<uint64_t, uint64_t> size_metrics( const circuit& c )
{
  return { c.gate_count(), c.wire_count() };
}

} // namespace ltflab
