// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its runtime budget and every tolerance is
// pinned in code.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <ltflab/biased.hpp>
#include <ltflab/chow.hpp>
#include <ltflab/circuit.hpp>
#include <ltflab/constructions.hpp>
#include <ltflab/experiments.hpp>
#include <ltflab/functions.hpp>
#include <ltflab/gf2.hpp>
#include <ltflab/restriction.hpp>

#include "test_util.hpp"

using namespace ltflab;

namespace
{

struct check_state
{
  bool ok = true;
  std::string detail;

  void expect( bool cond, const std::string& what )
  {
    if ( !cond && ok )
    {
      ok = false;
      detail = what;
    }
  }
};

double exact_ratio( const bigint& num, unsigned pow2 )
{
  if ( num == 0 )
    return 0.0;
  bigint q = pow2 >= 64 ? bigint( num >> ( pow2 - 64 ) ) : bigint( num << ( 64 - pow2 ) );
  return q.convert_to<double>() * std::ldexp( 1.0, -64 );
}

truth_table andreev_table( uint64_t n )
{
  andreev_layout L = make_andreev_layout( n );
  truth_table tt( L.n );
  for ( uint64_t x = 0; x < tt.num_rows(); ++x )
    tt.set( x, andreev_eval( L, x ) );
  return tt;
}

// ---------------------------------------------------------------- criterion 1
check_state construction_equivalence()
{
  check_state s;
  for ( uint64_t n : { 8ull, 16ull } )
  {
    truth_table oracle = andreev_table( n );
    s.expect( andreev_tc03_circuit( n ).table() == oracle, "tc03 differs at n=" + std::to_string( n ) );
    s.expect( andreev_ltf2_circuit( n ).table() == oracle, "ltf2 differs at n=" + std::to_string( n ) );
    s.expect( andreev_mod3mod2( n ).table() == oracle, "mod3mod2 differs at n=" + std::to_string( n ) );
    parity_decision_tree t = andreev_pdt( n );
    bool pdt_ok = true;
    for ( uint64_t x = 0; x < oracle.num_rows(); ++x )
      pdt_ok = pdt_ok && t.eval( x ) == oracle.get( x );
    s.expect( pdt_ok, "pdt differs at n=" + std::to_string( n ) );
  }
  return s;
}

// ---------------------------------------------------------------- criterion 2
check_state parity_approximation()
{
  check_state s;
  const uint32_t n = 64, c = 2;
  circuit pa = parity_approx_circuit( n, c );
  auto [gates, wires] = size_metrics( pa );
  s.expect( gates <= uint64_t( 8 * std::sqrt( double( n ) ) ), "gate count above 8*sqrt(n)" );
  s.expect( wires <= uint64_t( 8 * std::pow( double( n ), 1.5 ) ), "wire count above 8*n^1.5" );

  // every gate is symmetric (bottom: unit weights over all inputs; top: gates
  // only), so the output depends on the input weight alone
  for ( uint32_t i = 0; i < pa.gates().size(); ++i )
  {
    const gate& g = pa.gates()[i];
    if ( pa.is_bottom( i ) )
    {
      s.expect( g.wires.size() == n && g.unit_weights(), "bottom gate not symmetric" );
    }
    else
    {
      for ( const auto& w : g.wires )
        s.expect( w.ref.is_gate(), "top gate reads inputs directly" );
    }
  }

  // per-weight behaviour, evaluated on one representative per weight
  std::vector<bool> h( n + 1 );
  for ( uint32_t w = 0; w <= n; ++w )
  {
    std::vector<uint8_t> a( n, 0 );
    for ( uint32_t j = 0; j < w; ++j )
      a[j] = 1;
    h[w] = pa.eval( a );
    bool in_window = w >= 16 && w <= 48; // n/2 +- c*sqrt(n)
    if ( in_window )
      s.expect( h[w] == ( w % 2 == 0 ), "window weight " + std::to_string( w ) + " wrong" );
  }

  // exact agreement with the even-weight parity indicator, via binomial sums
  bigint agree = 0;
  for ( uint32_t w = 0; w <= n; ++w )
    if ( h[w] == ( w % 2 == 0 ) )
      agree += binomial( n, w );
  // agree/2^64 >= 0.99 exactly
  s.expect( agree * 100 >= ( bigint( 1 ) << n ) * 99, "agreement below 0.99" );
  return s;
}

// ---------------------------------------------------------------- criterion 3
check_state minsky_papert_bound()
{
  check_state s;
  truth_table parity2( 2 );
  parity2.set( 1, true );
  parity2.set( 2, true );
  uint64_t best = 0;
  auto ltfs = enumerate_ltfs( 2 );
  s.expect( ltfs.size() == 14, "expected 14 two-input LTFs" );
  for ( const auto& [tt, w] : ltfs )
    best = std::max( best, tt.agreement_count( parity2 ) );
  s.expect( best == 3, "max agreement with 2-bit parity must be exactly 3/4" );
  return s;
}

// ---------------------------------------------------------------- criterion 4
check_state enumeration_and_chow()
{
  check_state s;
  const uint64_t expected[] = { 4, 14, 104, 1882 };
  for ( uint32_t n = 1; n <= 4; ++n )
  {
    auto ltfs = enumerate_ltfs( n );
    s.expect( ltfs.size() == expected[n - 1],
              "count(" + std::to_string( n ) + ") = " + std::to_string( ltfs.size() ) );
    std::set<std::vector<int64_t>> chow_vectors;
    for ( const auto& [tt, w] : ltfs )
    {
      if ( !chow_vectors.insert( chow( tt ).scaled ).second )
      {
        s.expect( false, "chow collision at n=" + std::to_string( n ) );
        break;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------- criterion 5
check_state forcing_correctness()
{
  check_state s;
  split_rng rng( 50515 );
  for ( int round = 0; round < 10000 && s.ok; ++round )
  {
    uint32_t n = 2 + static_cast<uint32_t>( rng.below( 15 ) ); // up to 16 inputs
    bool unit = rng.below( 4 ) == 0;
    int64_t mag = rng.below( 2 ) ? 9 : 1000;
    gate g = unit ? maj_over_inputs( n ) : testutil::random_ltf( rng, n, mag );

    // at most 12 free coordinates
    uint32_t stars = static_cast<uint32_t>( rng.below( std::min( n, 12u ) + 1 ) );
    std::vector<trit> vals( n );
    for ( uint32_t i = 0; i < n; ++i )
      vals[i] = rng.coin() ? trit::one : trit::zero;
    for ( uint32_t placed = 0; placed < stars; )
    {
      uint32_t at = static_cast<uint32_t>( rng.below( n ) );
      if ( vals[at] != trit::star )
      {
        vals[at] = trit::star;
        ++placed;
      }
    }
    restriction rho( vals );

    forcing_outcome oracle = testutil::brute_force_outcome( g, rho, n );
    forcing_outcome got = forced_single_input( g, rho );
    forced_state fc = forced_constant( g, rho );

    s.expect( got.kind == oracle.kind, "forced_single_input disagrees with enumeration" );
    if ( got.kind == forcing_kind::single_input )
      s.expect( got.input == oracle.input && got.negated == oracle.negated, "single-input detail disagrees" );
    forced_state oracle_fc = oracle.kind == forcing_kind::forced_zero  ? forced_state::forced_zero
                             : oracle.kind == forcing_kind::forced_one ? forced_state::forced_one
                                                                       : forced_state::not_forced;
    s.expect( fc == oracle_fc, "forced_constant disagrees with enumeration" );
  }
  return s;
}

// ---------------------------------------------------------------- criterion 6
check_state forcing_envelope()
{
  check_state s;
  const uint64_t trials = 100000;
  const unsigned jobs = 2;

  std::unordered_map<uint64_t, double> est;
  std::unordered_map<uint64_t, double> se;
  for ( uint32_t n : { 256u, 1024u, 4096u } )
    for ( uint32_t parts : { 2u, 4u, 8u, 16u } )
    {
      estimate_row r =
          estimate_not_forced( maj_over_inputs( n ), partition::contiguous( n, parts ), trials, 606, "maj", jobs );
      est[uint64_t( n ) << 32 | parts] = r.estimate;
      se[uint64_t( n ) << 32 | parts] = r.stderr_value;
    }

  // single (c_low, C_env) pair: fitted on the smallest grid point, tolerance 1.5x
  double c_fit = est[uint64_t( 256 ) << 32 | 2] * std::sqrt( 256.0 ) / 2.0;
  double c_env = 1.5 * c_fit;
  double c_low = c_fit / 1.5;
  for ( uint32_t n : { 256u, 1024u, 4096u } )
    for ( uint32_t parts : { 2u, 4u, 8u, 16u } )
    {
      double p = est[uint64_t( n ) << 32 | parts];
      double sigma = se[uint64_t( n ) << 32 | parts];
      double scale = double( parts ) / std::sqrt( double( n ) );
      s.expect( p <= c_env * scale + 3 * sigma,
                "upper envelope fails at n=" + std::to_string( n ) + " parts=" + std::to_string( parts ) );
      s.expect( p >= c_low * scale - 3 * sigma,
                "lower envelope fails at n=" + std::to_string( n ) + " parts=" + std::to_string( parts ) );
    }

  // consecutive-n scaling: estimates halve per 4x n, within factor 1.5
  for ( uint32_t parts : { 2u, 4u, 8u, 16u } )
  {
    double r1 = est[uint64_t( 1024 ) << 32 | parts] / est[uint64_t( 256 ) << 32 | parts];
    double r2 = est[uint64_t( 4096 ) << 32 | parts] / est[uint64_t( 1024 ) << 32 | parts];
    s.expect( r1 >= 0.5 / 1.5 && r1 <= 0.5 * 1.5, "scaling 256->1024 off at parts=" + std::to_string( parts ) );
    s.expect( r2 >= 0.5 / 1.5 && r2 <= 0.5 * 1.5, "scaling 1024->4096 off at parts=" + std::to_string( parts ) );
  }

  // MAJ_400, |P| = 2 against the exact two-block convolution
  std::vector<bigint> ways( 399, 0 );
  for ( uint64_t a = 0; a <= 199; ++a )
    for ( uint64_t b = 0; b <= 199; ++b )
      ways[a + b] += binomial( 199, a ) * binomial( 199, b );
  double exact = exact_ratio( ways[198] + ways[199], 398 );
  estimate_row r400 =
      estimate_not_forced( maj_over_inputs( 400 ), partition::contiguous( 400, 2 ), trials, 607, "maj400", jobs );
  s.expect( std::abs( r400.estimate - exact ) <= 3 * bernoulli_stderr( exact, trials ),
            "n=400 estimate misses the convolution oracle" );
  return s;
}

// ---------------------------------------------------------------- criterion 7
check_state littlewood_offord()
{
  check_state s;
  const uint64_t trials = 100000;
  split_rng rng( 70707 );
  for ( int round = 0; round < 50 && s.ok; ++round )
  {
    // k large entries, k spread over {16, 32, ..., 1024}
    uint32_t k = 16u << rng.below( 7 );
    uint64_t L = 1 + rng.below( 20 ); // interval length
    uint32_t extra = static_cast<uint32_t>( rng.below( k / 2 + 1 ) );
    std::vector<bigint> w;
    bigint total = 0;
    for ( uint32_t i = 0; i < k; ++i )
    {
      bigint wi = bigint( L + rng.below( 2 * L + 1 ) ); // |w| >= L
      if ( rng.coin() )
        wi = -wi;
      total += wi;
      w.push_back( wi );
    }
    for ( uint32_t i = 0; i < extra; ++i )
      w.push_back( bigint( 1 + rng.below( L > 1 ? L - 1 : 1 ) ) * ( rng.coin() ? 1 : -1 ) );

    // center the interval where the mass sits
    bigint mid = total / 2;
    lo_interval I{ mid, mid + bigint( L ) };
    estimate_row r = lo_probe_mc( w, I, trials, 808 + round, "lo", 2 );
    double bound = 4.0 / std::sqrt( double( k ) );
    s.expect( r.estimate <= bound, "probe " + std::to_string( round ) + " exceeds 4/sqrt(k): " +
                                       std::to_string( r.estimate ) + " > " + std::to_string( bound ) );
  }

  // uniform weights, point interval: C(100,50)/2^100 within 3 sigma
  std::vector<bigint> ones( 100, 1 );
  double exact = lo_probe_exact( ones, { 50, 50 } ).estimate;
  double frozen = exact_ratio( binomial( 100, 50 ), 100 );
  s.expect( std::abs( exact - frozen ) < 1e-15, "exact binomial path self-check" );
  estimate_row mc = lo_probe_mc( ones, { 50, 50 }, trials, 909, "lo", 2 );
  s.expect( std::abs( mc.estimate - exact ) <= 3 * bernoulli_stderr( exact, trials ),
            "uniform point-interval estimate misses the exact value" );
  return s;
}

// ---------------------------------------------------------------- criterion 8
check_state restriction_soundness()
{
  check_state s;
  split_rng rng( 80808 );
  for ( int round = 0; round < 200 && s.ok; ++round )
  {
    uint32_t n = 2 + static_cast<uint32_t>( rng.below( 11 ) ); // n <= 12
    circuit c = testutil::random_circuit( rng, n, 6, false );  // depth 2
    std::vector<trit> vals( n );
    for ( uint32_t i = 0; i < n; ++i )
      vals[i] = static_cast<trit>( rng.below( 3 ) );
    restriction rho( vals );
    circuit simplified = apply_restriction( c, rho );

    auto stars = rho.star_indices();
    std::vector<uint8_t> full( n );
    for ( uint32_t i = 0; i < n; ++i )
      full[i] = rho.is_star( i ) ? 0 : ( rho.at( i ) == trit::one );
    truth_table got = simplified.table();
    for ( uint64_t m = 0; m < ( uint64_t( 1 ) << stars.size() ); ++m )
    {
      std::vector<uint8_t> freebits( stars.size() );
      for ( size_t j = 0; j < stars.size(); ++j )
      {
        freebits[j] = ( m >> j ) & 1;
        full[stars[j]] = freebits[j];
      }
      if ( got.get( m ) != c.eval( full ) )
      {
        s.expect( false, "simplified circuit differs from the restricted original" );
        break;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------- criterion 9
check_state signature_property()
{
  check_state s;
  split_rng rng( 90909 );
  uint64_t instances = 0, matched = 0;
  while ( instances < 10000 && s.ok )
  {
    uint32_t n = 2 + static_cast<uint32_t>( rng.below( 9 ) ); // n <= 10
    uint32_t gs = 2 + static_cast<uint32_t>( rng.below( 7 ) ); // s <= 8

    std::vector<gate> bottoms;
    for ( uint32_t i = 0; i < gs; ++i )
      bottoms.push_back( testutil::random_ltf( rng, n, 3 ) );

    std::unordered_map<std::string, std::pair<depth2_signature, truth_table>> by_sig;
    for ( int k = 0; k < 8; ++k )
    {
      depth2_instance inst;
      inst.bottoms = bottoms;
      for ( uint32_t i = 0; i < gs; ++i )
        inst.top_weights.push_back( testutil::random_weight( rng, 3 ) );
      inst.top_threshold = testutil::random_weight( rng, 3 );
      if ( k % 2 == 1 )
      { // scaled duplicate of the previous top computes the same function
        for ( auto& wv : inst.top_weights )
          wv *= 3;
        inst.top_threshold *= 3;
      }
      depth2_signature sig = depth2_signature_of( inst, n );
      truth_table composed = depth2_composed_table( inst, n );
      std::string key = std::to_string( sig.set_size );
      for ( uint64_t v : sig.sigma )
        key += "," + std::to_string( v );
      auto [it, fresh] = by_sig.emplace( key, std::make_pair( sig, composed ) );
      if ( !fresh && !( it->second.second == composed ) )
        s.expect( false, "equal signature but different composed function" );
      if ( !fresh )
        ++matched;
      ++instances;
    }
  }
  s.expect( matched >= 100, "too few signature coincidences to be meaningful" );
  return s;
}

// --------------------------------------------------------------- criterion 10
check_state small_bias_code()
{
  check_state s;
  {
    biased_matrix A = biased_matrix::build( 4, 4 );
    s.expect( bias_of_exhaustive( A ).at_most( 3, 16 ), "(4,4) bias exceeds 3/16" );
    uint64_t m = A.m();
    for ( uint64_t x = 0; x < 16 && s.ok; ++x )
      for ( uint64_t y = x + 1; y < 16; ++y )
      {
        auto cx = A.codeword( x ), cy = A.codeword( y );
        uint64_t agreeing = 0;
        for ( size_t wd = 0; wd < cx.size(); ++wd )
          agreeing += std::popcount( ~( cx[wd] ^ cy[wd] ) );
        // within 1/2 +- 3/16 of m = 256: [80, 176]
        if ( agreeing * 16 < m * 5 || agreeing * 16 > m * 11 )
        {
          s.expect( false, "codeword pair agreement outside the band" );
          break;
        }
      }
  }
  {
    biased_matrix A = biased_matrix::build( 8, 6 );
    s.expect( bias_of_exhaustive( A ).at_most( 7, 64 ), "(8,6) bias exceeds 7/64" );
  }
  {
    // independent dense reimplementation of B_{8,4} over its full table
    const uint32_t n = 8, k = 4, r = 2;
    b_function B( n, k );
    binary_field F( r );
    std::vector<std::vector<uint8_t>> dense( 16, std::vector<uint8_t>( n, 0 ) );
    for ( uint64_t alpha = 0; alpha < 4; ++alpha )
      for ( uint64_t beta = 0; beta < 4; ++beta )
      {
        uint32_t p = 1;
        for ( uint32_t i = 0; i < n; ++i )
        {
          dense[( alpha << r ) | beta][i] = std::popcount( p & static_cast<uint32_t>( beta ) ) & 1;
          p = F.mul( p, static_cast<uint32_t>( alpha ) );
        }
      }
    for ( uint64_t xa = 0; xa < ( uint64_t( 1 ) << 16 ) && s.ok; ++xa )
    {
      uint64_t x = xa & 0xFF, a = xa >> 8;
      uint64_t row = 0;
      for ( uint32_t i = 0; i < k; ++i )
      {
        uint32_t b0 = ( a >> ( 2 * i ) ) & 1, b1 = ( a >> ( 2 * i + 1 ) ) & 1;
        row = ( row << 1 ) | ( b0 ^ b1 );
      }
      uint8_t bit = 0;
      for ( uint32_t col = 0; col < n; ++col )
        bit ^= dense[row][col] & ( ( x >> col ) & 1 );
      if ( B.eval( x, a ) != ( bit != 0 ) )
        s.expect( false, "B_{8,4} differs from the dense reimplementation" );
    }
  }
  return s;
}

} // namespace

int main()
{
  struct entry
  {
    int number;
    const char* name;
    double budget_seconds;
    std::function<check_state()> body;
  };
  std::vector<entry> criteria = {
      { 1, "construction equivalence", 60.0, construction_equivalence },
      { 2, "parity approximation", 5.0, parity_approximation },
      { 3, "Minsky-Papert 75% bound", 1.0, minsky_papert_bound },
      { 4, "LTF enumeration and Chow uniqueness", 600.0, enumeration_and_chow },
      { 5, "forcing correctness", 120.0, forcing_correctness },
      { 6, "forcing envelope and majority tightness", 600.0, forcing_envelope },
      { 7, "Littlewood-Offord envelope", 300.0, littlewood_offord },
      { 8, "restriction-simplification soundness", 120.0, restriction_soundness },
      { 9, "depth-2 signature property", 300.0, signature_property },
      { 10, "small-bias code", 120.0, small_bias_code },
  };

  int failures = 0;
  for ( auto& e : criteria )
  {
    auto t0 = std::chrono::steady_clock::now();
    check_state s;
    try
    {
      s = e.body();
    }
    catch ( const std::exception& ex )
    {
      s.ok = false;
      s.detail = std::string( "exception: " ) + ex.what();
    }
    double dt = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
    if ( dt > e.budget_seconds )
    {
      s.ok = false;
      s.detail = "runtime " + std::to_string( dt ) + "s exceeds budget";
    }
    std::printf( "%s: criterion %d (%s) [%.2fs]%s%s\n", s.ok ? "PASS" : "FAIL", e.number, e.name, dt,
                 s.ok ? "" : " -- ", s.ok ? "" : s.detail.c_str() );
    failures += !s.ok;
  }
  if ( failures )
    std::printf( "%d criterion(s) failed\n", failures );
  else
    std::printf( "all %zu criteria passed\n", criteria.size() );
  return failures ? 1 : 0;
}
