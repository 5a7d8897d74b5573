#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bigint.hpp"
#include "circuit.hpp"
#include "errors.hpp"
#include "functions.hpp"
#include "restriction.hpp"
#include "rng.hpp"
#include "truth_table.hpp"

namespace ltflab
{

/*! \brief One estimator output row; the CSV schema is
 * `label,n,parts,trials,estimate,stderr,seed` with deterministic formatting. */
struct estimate_row
{
  std::string label;
  uint64_t n = 0;
  uint64_t parts = 0;
  uint64_t trials = 0;
  double estimate = 0.0;
  double stderr_value = 0.0;
  uint64_t seed = 0;
};

inline double bernoulli_stderr( double p, uint64_t trials )
{
  return trials ? std::sqrt( p * ( 1.0 - p ) / double( trials ) ) : 0.0;
}

inline std::string format_double( double v )
{
  char buf[64];
  std::snprintf( buf, sizeof buf, "%.17g", v );
  return buf;
}

inline std::string csv_header()
{
  return "label,n,parts,trials,estimate,stderr,seed";
}

inline std::string to_csv_line( const estimate_row& r )
{
  std::ostringstream os;
  os << r.label << ',' << r.n << ',' << r.parts << ',' << r.trials << ',' << format_double( r.estimate ) << ','
     << format_double( r.stderr_value ) << ',' << r.seed;
  return os.str();
}

inline void write_csv( std::ostream& os, const std::vector<estimate_row>& rows,
                       const std::vector<std::string>& comments = {} )
{
  for ( const auto& c : comments )
    os << "# " << c << "\n";
  os << csv_header() << "\n";
  for ( const auto& r : rows )
    os << to_csv_line( r ) << "\n";
}

inline std::vector<estimate_row> parse_csv( std::istream& is )
{
  std::string line;
  bool header_seen = false;
  std::vector<estimate_row> rows;
  while ( std::getline( is, line ) )
  {
    if ( line.empty() || line[0] == '#' )
      continue;
    if ( !header_seen )
    {
      if ( line != csv_header() )
        throw parse_error( "csv: unexpected header '" + line + "'" );
      header_seen = true;
      continue;
    }
    std::istringstream ls( line );
    std::string field;
    std::vector<std::string> fields;
    while ( std::getline( ls, field, ',' ) )
      fields.push_back( field );
    if ( fields.size() != 7 )
      throw parse_error( "csv: expected 7 fields, got " + std::to_string( fields.size() ) );
    estimate_row r;
    r.label = fields[0];
    r.n = std::stoull( fields[1] );
    r.parts = std::stoull( fields[2] );
    r.trials = std::stoull( fields[3] );
    r.estimate = std::stod( fields[4] );
    r.stderr_value = std::stod( fields[5] );
    r.seed = std::stoull( fields[6] );
    rows.push_back( std::move( r ) );
  }
  if ( !header_seen )
    throw parse_error( "csv: missing header" );
  return rows;
}

/*! \brief Precompiled view of a threshold gate over primary inputs for the
 * Monte Carlo engines: support masks plus int64 or unit-weight fast paths. */
struct gate_profile
{
  gate g;
  uint32_t n = 0;
  bool modular = false; // MOD gates take the generic classification path
  bool unit = false;
  bool fits64 = false;
  int64_t t64 = 0;
  std::vector<uint64_t> support;
  std::vector<uint32_t> vars;
  std::vector<int64_t> w64;

  static gate_profile build( const gate& src, uint32_t n )
  {
    gate_profile p;
    p.g = src;
    p.n = n;
    p.modular = src.kind == gate_kind::mod2 || src.kind == gate_kind::mod3;
    p.support.assign( ( n + 63 ) / 64, 0 );
    bigint abs_sum = 0;
    for ( const auto& w : src.wires )
    {
      if ( !w.ref.is_input() || w.ref.index >= n )
        throw structural_error( "gate_profile: gate must read primary inputs x_0..x_{n-1}" );
      p.support[w.ref.index >> 6] |= uint64_t( 1 ) << ( w.ref.index & 63 );
      p.vars.push_back( w.ref.index );
      abs_sum += abs( w.weight );
    }
    if ( p.modular )
      return p;
    p.unit = src.unit_weights();
    auto t = to_int64( src.threshold );
    p.fits64 = t.has_value() && abs_sum + abs( src.threshold ) < ( bigint( 1 ) << 62 );
    if ( p.fits64 )
    {
      p.t64 = *t;
      for ( const auto& w : src.wires )
        p.w64.push_back( static_cast<int64_t>( w.weight ) );
    }
    return p;
  }
};

/*! \brief forced_constant on a packed restriction, via the profile's fast
 * paths; agrees with the exact routine by construction. */
inline forced_state profiled_forced_state( const gate_profile& p, const packed_restriction& rho )
{
  if ( p.modular )
    throw structural_error( "profiled_forced_state: defined for threshold gates" );
  if ( p.unit )
  {
    int64_t s = 0, b = 0;
    for ( size_t w = 0; w < p.support.size(); ++w )
    {
      uint64_t sup = p.support[w];
      uint64_t stars = rho.star_bits[w] & sup;
      s += std::popcount( rho.value_bits[w] & ~rho.star_bits[w] & sup );
      b += std::popcount( stars );
    }
    int64_t t = p.fits64 ? p.t64 : 0; // unit gates always fit
    if ( s >= t )
      return forced_state::forced_one;
    if ( s + b < t )
      return forced_state::forced_zero;
    return forced_state::not_forced;
  }
  if ( p.fits64 )
  {
    int64_t s = 0, maxfree = 0, minfree = 0;
    for ( size_t i = 0; i < p.vars.size(); ++i )
    {
      uint32_t v = p.vars[i];
      int64_t w = p.w64[i];
      if ( rho.is_star( v ) )
      {
        if ( w > 0 )
          maxfree += w;
        else
          minfree += w;
      }
      else if ( rho.value( v ) )
      {
        s += w;
      }
    }
    if ( s + minfree >= p.t64 )
      return forced_state::forced_one;
    if ( s + maxfree < p.t64 )
      return forced_state::forced_zero;
    return forced_state::not_forced;
  }
  return forced_constant( p.g, unpack( rho ) );
}

/*! \brief True when the restricted gate still depends on two or more free
 * variables. Unit-weight gates use the closed form; everything else falls
 * back to exhaustive classification. */
inline bool profiled_many_inputs( const gate_profile& p, const packed_restriction& rho )
{
  if ( p.unit )
  {
    int64_t s = 0, b = 0;
    for ( size_t w = 0; w < p.support.size(); ++w )
    {
      uint64_t sup = p.support[w];
      s += std::popcount( rho.value_bits[w] & ~rho.star_bits[w] & sup );
      b += std::popcount( rho.star_bits[w] & sup );
    }
    int64_t m = p.t64 - s;
    return b >= 2 && m >= 1 && m <= b;
  }
  return forced_single_input( p.g, unpack( rho ) ).kind == forcing_kind::many_inputs;
}

/*! \brief Free support size of the gate under the restriction (its surviving
 * wire count after simplification). */
inline uint32_t profiled_free_support( const gate_profile& p, const packed_restriction& rho )
{
  uint32_t b = 0;
  for ( size_t w = 0; w < p.support.size(); ++w )
    b += std::popcount( rho.star_bits[w] & p.support[w] );
  return b;
}

namespace detail
{

/*! \brief Runs fn(trial) -> uint64 over [0, trials) on `jobs` workers and
 * returns the exact sum; the result does not depend on scheduling. */
template<typename Fn>
uint64_t sum_over_trials( uint64_t trials, unsigned jobs, Fn&& fn )
{
  if ( jobs <= 1 || trials < 2 * jobs )
  {
    uint64_t acc = 0;
    for ( uint64_t t = 0; t < trials; ++t )
      acc += fn( t );
    return acc;
  }
  std::vector<uint64_t> partial( jobs, 0 );
  std::vector<std::thread> workers;
  uint64_t chunk = ( trials + jobs - 1 ) / jobs;
  for ( unsigned j = 0; j < jobs; ++j )
  {
    uint64_t lo = j * chunk, hi = std::min( trials, lo + chunk );
    workers.emplace_back( [&, lo, hi, j]() {
      uint64_t acc = 0;
      for ( uint64_t t = lo; t < hi; ++t )
        acc += fn( t );
      partial[j] = acc;
    } );
  }
  for ( auto& w : workers )
    w.join();
  uint64_t acc = 0;
  for ( uint64_t v : partial )
    acc += v;
  return acc;
}

inline void sample_packed_into( const partition& P, uint64_t seed, uint64_t trial, packed_restriction& r )
{
  split_rng rng( seed, trial );
  r.n = P.n();
  rng.fill_bits( r.value_bits, P.n() );
  r.star_bits.assign( r.value_bits.size(), 0 );
  for ( const auto& part : P.parts() )
  {
    uint32_t star = part[rng.below( part.size() )];
    r.star_bits[star >> 6] |= uint64_t( 1 ) << ( star & 63 );
  }
}

} // namespace detail

/*! \brief Monte Carlo estimate of Pr[gate not forced to a constant] under
 * random restrictions across the partition. */
inline estimate_row estimate_not_forced( const gate& g, const partition& P, uint64_t trials, uint64_t seed,
                                         const std::string& label = "not_forced", unsigned jobs = 1 )
{
  if ( trials == 0 )
    throw structural_error( "estimate_not_forced: trials >= 1 required" );
  gate_profile prof = gate_profile::build( g, P.n() );
  uint64_t hits = detail::sum_over_trials( trials, jobs, [&]( uint64_t t ) -> uint64_t {
    thread_local packed_restriction rho;
    detail::sample_packed_into( P, seed, t, rho );
    return profiled_forced_state( prof, rho ) == forced_state::not_forced ? 1 : 0;
  } );
  double p = double( hits ) / double( trials );
  return { label, P.n(), P.size(), trials, p, bernoulli_stderr( p, trials ), seed };
}

/*! \brief Closed interval for the anti-concentration probe. */
struct lo_interval
{
  bigint lo, hi;
};

namespace detail
{

inline double ratio_to_double( const bigint& num, unsigned pow2 )
{
  if ( num == 0 )
    return 0.0;
  bigint q = pow2 >= 64 ? bigint( num >> ( pow2 - 64 ) ) : bigint( num << ( 64 - pow2 ) );
  return q.convert_to<double>() * std::ldexp( 1.0, -64 );
}

} // namespace detail

/*! \brief Exact Pr[sum of weights over a uniform 0/1 vector lies in I].
 * Supported when all weights are equal (binomial summation, any n) or when
 * n <= 28 (exhaustive enumeration; weights must fit int64 sums). */
inline estimate_row lo_probe_exact( const std::vector<bigint>& weights, const lo_interval& I,
                                    const std::string& label = "lo" )
{
  uint64_t n = weights.size();
  if ( I.hi < I.lo )
    return { label, n, 0, 0, 0.0, 0.0, 0 };
  bool all_equal = true;
  for ( const auto& w : weights )
    all_equal = all_equal && w == weights[0];

  if ( n > 0 && all_equal )
  {
    const bigint& w = weights[0];
    bigint num = 0;
    if ( w == 0 )
    {
      num = ( I.lo <= 0 && 0 <= I.hi ) ? ( bigint( 1 ) << n ) : 0;
    }
    else
    {
      for ( uint64_t c = 0; c <= n; ++c )
      {
        bigint s = w * c;
        if ( I.lo <= s && s <= I.hi )
          num += binomial( n, c );
      }
    }
    return { label, n, 0, 0, detail::ratio_to_double( num, static_cast<unsigned>( n ) ), 0.0, 0 };
  }

  if ( n > 28 )
    throw capacity_error( "lo_probe: exact mode needs n <= 28 or all-equal weights" );
  bigint guard = 0;
  for ( const auto& w : weights )
    guard += abs( w );
  if ( guard >= ( bigint( 1 ) << 62 ) || !to_int64( I.lo ) || !to_int64( I.hi ) )
    throw capacity_error( "lo_probe: exact enumeration requires int64-sized sums" );

  std::vector<int64_t> w64;
  for ( const auto& w : weights )
    w64.push_back( static_cast<int64_t>( w ) );
  int64_t lo = static_cast<int64_t>( I.lo ), hi = static_cast<int64_t>( I.hi );
  uint64_t count = 0;
  int64_t sum = 0;
  uint64_t rows = uint64_t( 1 ) << n;
  // Gray walk: one weight update per assignment
  count += ( lo <= 0 && 0 <= hi );
  for ( uint64_t step = 1; step < rows; ++step )
  {
    unsigned j = static_cast<unsigned>( std::countr_zero( step ) );
    uint64_t gray = step ^ ( step >> 1 );
    sum += ( gray >> j ) & 1 ? w64[j] : -w64[j];
    count += ( lo <= sum && sum <= hi );
  }
  return { label, n, 0, 0, detail::ratio_to_double( bigint( count ), static_cast<unsigned>( n ) ), 0.0, 0 };
}

/*! \brief Monte Carlo version of the probe; byte-sliced partial-sum tables
 * make each trial O(n/8) int64 adds. */
inline estimate_row lo_probe_mc( const std::vector<bigint>& weights, const lo_interval& I, uint64_t trials,
                                 uint64_t seed, const std::string& label = "lo", unsigned jobs = 1 )
{
  uint64_t n = weights.size();
  bigint abs_sum = 0;
  for ( const auto& w : weights )
    abs_sum += abs( w );
  if ( abs_sum >= ( bigint( 1 ) << 62 ) )
    throw capacity_error( "lo_probe: weights exceed int64 sums" );
  int64_t lo = static_cast<int64_t>( I.lo < -abs_sum ? -abs_sum - 1 : I.lo > abs_sum ? abs_sum + 1 : I.lo );
  int64_t hi = static_cast<int64_t>( I.hi < -abs_sum ? -abs_sum - 1 : I.hi > abs_sum ? abs_sum + 1 : I.hi );

  uint64_t groups = ( n + 7 ) / 8;
  std::vector<int64_t> tables( groups * 256, 0 );
  for ( uint64_t g = 0; g < groups; ++g )
    for ( uint32_t byte = 0; byte < 256; ++byte )
    {
      int64_t s = 0;
      for ( unsigned b = 0; b < 8; ++b )
      {
        uint64_t var = g * 8 + b;
        if ( ( byte >> b ) & 1 && var < n )
          s += static_cast<int64_t>( weights[var] );
      }
      tables[g * 256 + byte] = s;
    }

  uint64_t hits = detail::sum_over_trials( trials, jobs, [&]( uint64_t t ) -> uint64_t {
    thread_local std::vector<uint64_t> bits;
    split_rng rng( seed, t );
    rng.fill_bits( bits, n );
    int64_t sum = 0;
    for ( uint64_t g = 0; g < groups; ++g )
    {
      uint64_t byte = ( bits[g >> 3] >> ( ( g & 7 ) * 8 ) ) & 0xFF;
      sum += tables[g * 256 + byte];
    }
    return lo <= sum && sum <= hi;
  } );
  double p = double( hits ) / double( trials );
  return { label, n, 0, trials, p, bernoulli_stderr( p, trials ), seed };
}

/*! \brief Exact agreement fraction of two n-bit functions (n <= 28). */
inline estimate_row agreement_exact( const bool_fn& f, const bool_fn& g, uint32_t n,
                                     const std::string& label = "agree" )
{
  if ( n > 28 )
    throw capacity_error( "agreement: exact mode needs n <= 28" );
  uint64_t rows = uint64_t( 1 ) << n;
  uint64_t agree = 0;
  for ( uint64_t x = 0; x < rows; ++x )
    agree += f( x ) == g( x );
  return { label, n, 0, 0, detail::ratio_to_double( bigint( agree ), n ), 0.0, 0 };
}

inline estimate_row agreement_mc( const bool_fn& f, const bool_fn& g, uint32_t n, uint64_t trials, uint64_t seed,
                                  const std::string& label = "agree", unsigned jobs = 1 )
{
  if ( n > 64 )
    throw capacity_error( "agreement: sampled mode needs n <= 64" );
  uint64_t mask = n == 64 ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << n ) - 1 );
  uint64_t hits = detail::sum_over_trials( trials, jobs, [&]( uint64_t t ) -> uint64_t {
    split_rng rng( seed, t );
    uint64_t x = rng.next() & mask;
    return f( x ) == g( x );
  } );
  double p = double( hits ) / double( trials );
  return { label, n, 0, trials, p, bernoulli_stderr( p, trials ), seed };
}

/*! \brief min over inputs of the fraction of circuits agreeing with f; the
 * collection is an eps-approximate majority iff the margin is >= 1/2 + eps. */
struct margin_result
{
  double margin = 1.0;
  uint64_t witness_input = 0;
  uint64_t inputs_checked = 0;
};

inline margin_result approx_majority_margin_exact( const std::vector<const circuit*>& circuits, const bool_fn& f,
                                                   uint32_t n )
{
  if ( n > 20 )
    throw capacity_error( "approx_majority_margin: exact mode needs n <= 20" );
  if ( circuits.empty() )
    throw structural_error( "approx_majority_margin: empty collection" );
  std::vector<truth_table> tables;
  for ( const circuit* c : circuits )
  {
    if ( c->num_inputs() != n )
      throw structural_error( "approx_majority_margin: circuit arity mismatch" );
    tables.push_back( c->table() );
  }
  uint64_t rows = uint64_t( 1 ) << n;
  uint64_t worst = circuits.size() + 1;
  uint64_t witness = 0;
  for ( uint64_t x = 0; x < rows; ++x )
  {
    bool fx = f( x );
    uint64_t agree = 0;
    for ( const auto& t : tables )
      agree += t.get( x ) == fx;
    if ( agree < worst )
    {
      worst = agree;
      witness = x;
    }
  }
  return { double( worst ) / double( circuits.size() ), witness, rows };
}

inline margin_result approx_majority_margin_mc( const std::vector<const circuit*>& circuits, const bool_fn& f,
                                                uint32_t n, uint64_t trials, uint64_t seed )
{
  if ( n > 64 )
    throw capacity_error( "approx_majority_margin: n <= 64" );
  if ( circuits.empty() )
    throw structural_error( "approx_majority_margin: empty collection" );
  uint64_t mask = n == 64 ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << n ) - 1 );
  uint64_t worst = circuits.size() + 1;
  uint64_t witness = 0;
  for ( uint64_t t = 0; t < trials; ++t )
  {
    split_rng rng( seed, t );
    uint64_t x = rng.next() & mask;
    bool fx = f( x );
    uint64_t agree = 0;
    for ( const circuit* c : circuits )
      agree += c->eval_bits( x ) == fx;
    if ( agree < worst )
    {
      worst = agree;
      witness = x;
    }
  }
  return { double( worst ) / double( circuits.size() ), witness, trials };
}

/*! \brief Distribution summary of bottom-layer survivors under random
 * restrictions: gates still depending on two or more free variables, and the
 * wires they keep. */
struct survival_summary
{
  uint64_t trials = 0;
  uint64_t seed = 0;
  uint64_t bottom_gates = 0;
  uint64_t bottom_wires = 0;
  double mean_gates = 0.0, sd_gates = 0.0;
  double mean_wires = 0.0, sd_wires = 0.0;
  uint64_t max_gates = 0, max_wires = 0;
  std::vector<uint64_t> gate_histogram; // index = surviving gate count
};

inline survival_summary restriction_survival( const circuit& c, const partition& P, uint64_t trials, uint64_t seed,
                                              unsigned jobs = 1 )
{
  if ( c.depth() > 3 )
    throw structural_error( "restriction_survival: circuit depth exceeds 3" );
  if ( P.n() != c.num_inputs() )
    throw structural_error( "restriction_survival: partition arity mismatch" );

  std::vector<gate_profile> profiles;
  for ( uint32_t i = 0; i < c.gates().size(); ++i )
    if ( c.is_bottom( i ) && c.gates()[i].kind != gate_kind::constant )
      profiles.push_back( gate_profile::build( c.gates()[i], c.num_inputs() ) );

  survival_summary s;
  s.trials = trials;
  s.seed = seed;
  s.bottom_gates = profiles.size();
  for ( const auto& p : profiles )
    s.bottom_wires += p.vars.size();
  s.gate_histogram.assign( profiles.size() + 1, 0 );

  struct accum
  {
    uint64_t sum_g = 0, sum_g2 = 0, sum_w = 0, sum_w2 = 0, max_g = 0, max_w = 0;
    std::vector<uint64_t> hist;
  };
  unsigned workers = jobs <= 1 ? 1 : jobs;
  std::vector<accum> acc( workers );
  for ( auto& a : acc )
    a.hist.assign( profiles.size() + 1, 0 );

  auto run_range = [&]( unsigned w, uint64_t lo, uint64_t hi ) {
    packed_restriction rho;
    accum& a = acc[w];
    for ( uint64_t t = lo; t < hi; ++t )
    {
      detail::sample_packed_into( P, seed, t, rho );
      uint64_t g = 0, wires = 0;
      for ( const auto& p : profiles )
        if ( profiled_many_inputs( p, rho ) )
        {
          ++g;
          wires += profiled_free_support( p, rho );
        }
      a.sum_g += g;
      a.sum_g2 += g * g;
      a.sum_w += wires;
      a.sum_w2 += wires * wires;
      a.max_g = std::max( a.max_g, g );
      a.max_w = std::max( a.max_w, wires );
      ++a.hist[g];
    }
  };

  if ( workers == 1 )
  {
    run_range( 0, 0, trials );
  }
  else
  {
    std::vector<std::thread> threads;
    uint64_t chunk = ( trials + workers - 1 ) / workers;
    for ( unsigned w = 0; w < workers; ++w )
      threads.emplace_back( run_range, w, w * chunk, std::min( trials, ( w + 1 ) * chunk ) );
    for ( auto& t : threads )
      t.join();
  }

  uint64_t sum_g = 0, sum_g2 = 0, sum_w = 0, sum_w2 = 0;
  for ( const auto& a : acc )
  {
    sum_g += a.sum_g;
    sum_g2 += a.sum_g2;
    sum_w += a.sum_w;
    sum_w2 += a.sum_w2;
    s.max_gates = std::max( s.max_gates, a.max_g );
    s.max_wires = std::max( s.max_wires, a.max_w );
    for ( size_t i = 0; i < a.hist.size(); ++i )
      s.gate_histogram[i] += a.hist[i];
  }
  auto sample_sd = []( uint64_t sum, uint64_t sum2, uint64_t n ) -> double {
    if ( n < 2 )
      return 0.0;
    double mean = double( sum ) / double( n );
    double var = ( double( sum2 ) - double( n ) * mean * mean ) / double( n - 1 );
    return var > 0 ? std::sqrt( var ) : 0.0;
  };
  s.mean_gates = trials ? double( sum_g ) / double( trials ) : 0.0;
  s.mean_wires = trials ? double( sum_w ) / double( trials ) : 0.0;
  s.sd_gates = sample_sd( sum_g, sum_g2, trials );
  s.sd_wires = sample_sd( sum_w, sum_w2, trials );
  return s;
}

} // namespace ltflab
