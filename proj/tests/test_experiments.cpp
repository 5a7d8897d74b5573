#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <ltflab/chow.hpp>
#include <ltflab/constructions.hpp>
#include <ltflab/experiments.hpp>
#include <ltflab/functions.hpp>

#include "test_util.hpp"

using namespace ltflab;

namespace
{

double exact_ratio( const bigint& num, unsigned pow2 )
{
  if ( num == 0 )
    return 0.0;
  bigint q = pow2 >= 64 ? bigint( num >> ( pow2 - 64 ) ) : bigint( num << ( 64 - pow2 ) );
  return q.convert_to<double>() * std::ldexp( 1.0, -64 );
}

/*! Exhaustive oracle: averages forced_constant over every star choice and
 * every assignment of the fixed coordinates. */
double exact_not_forced_probability( const gate& g, const partition& P )
{
  uint32_t n = P.n();
  const auto& parts = P.parts();
  std::vector<size_t> choice( parts.size(), 0 );
  uint64_t star_combos = 1;
  for ( const auto& part : parts )
    star_combos *= part.size();

  uint64_t hits = 0, total = 0;
  for ( uint64_t combo = 0; combo < star_combos; ++combo )
  {
    uint64_t c = combo;
    std::vector<uint32_t> stars;
    for ( const auto& part : parts )
    {
      stars.push_back( part[c % part.size()] );
      c /= part.size();
    }
    std::vector<uint32_t> fixed;
    for ( uint32_t i = 0; i < n; ++i )
      if ( std::find( stars.begin(), stars.end(), i ) == stars.end() )
        fixed.push_back( i );
    for ( uint64_t m = 0; m < ( uint64_t( 1 ) << fixed.size() ); ++m )
    {
      std::vector<trit> vals( n, trit::star );
      for ( size_t j = 0; j < fixed.size(); ++j )
        vals[fixed[j]] = ( ( m >> j ) & 1 ) ? trit::one : trit::zero;
      hits += forced_constant( g, restriction( vals ) ) == forced_state::not_forced;
      ++total;
    }
  }
  return double( hits ) / double( total );
}

} // namespace

TEST_CASE( "all-singleton partitions never force a majority", "[experiments]" )
{
  for ( uint32_t n : { 3u, 5u, 9u } )
  {
    estimate_row r = estimate_not_forced( maj_over_inputs( n ), partition::singletons( n ), 2000, 7 );
    CHECK( r.estimate == 1.0 );
  }
}

TEST_CASE( "estimator matches the exhaustive small-case oracle at n=6", "[experiments][oracle]" )
{
  partition P( 6, { { 0, 1 }, { 2, 3 }, { 4, 5 } } );

  // dominant-weight gate: not forced only when its variable is starred
  gate dominant = ltf_over_inputs( { 100, 1, 1, 1, 1, 1 }, 50 );
  double exact = exact_not_forced_probability( dominant, P );
  estimate_row r = estimate_not_forced( dominant, P, 20000, 99 );
  CHECK( std::abs( r.estimate - exact ) <= 3 * bernoulli_stderr( exact, r.trials ) + 1e-12 );
  CHECK( r.estimate <= 0.5 + 3 * r.stderr_value );

  gate maj6 = maj_over_inputs( 6 );
  double exact_maj = exact_not_forced_probability( maj6, P );
  estimate_row rm = estimate_not_forced( maj6, P, 20000, 100 );
  CHECK( std::abs( rm.estimate - exact_maj ) <= 3 * bernoulli_stderr( exact_maj, rm.trials ) + 1e-12 );

  split_rng rng( 17 );
  for ( int round = 0; round < 5; ++round )
  {
    gate g = testutil::random_ltf( rng, 6, 10 );
    double p = exact_not_forced_probability( g, P );
    estimate_row rr = estimate_not_forced( g, P, 20000, 1000 + round );
    CHECK( std::abs( rr.estimate - p ) <= 3 * bernoulli_stderr( p, rr.trials ) + 1e-12 );
  }
}

TEST_CASE( "majority at n=400 matches the two-block convolution oracle", "[experiments][oracle]" )
{
  // blocks fix 199 coordinates each; sum of two Binomial(199) counts
  std::vector<bigint> ways( 399, 0 );
  for ( uint64_t a = 0; a <= 199; ++a )
    for ( uint64_t b = 0; b <= 199; ++b )
      ways[a + b] += binomial( 199, a ) * binomial( 199, b );
  // not forced iff the fixed-ones count s satisfies 198 <= s <= 199
  double exact = exact_ratio( ways[198] + ways[199], 398 );

  estimate_row r = estimate_not_forced( maj_over_inputs( 400 ), partition::contiguous( 400, 2 ), 20000, 5 );
  CHECK( std::abs( r.estimate - exact ) <= 3 * bernoulli_stderr( exact, r.trials ) );
}

TEST_CASE( "estimates are reproducible and scheduling-independent", "[experiments]" )
{
  gate g = maj_over_inputs( 64 );
  partition P = partition::contiguous( 64, 4 );
  estimate_row a = estimate_not_forced( g, P, 5000, 42, "x", 1 );
  estimate_row b = estimate_not_forced( g, P, 5000, 42, "x", 1 );
  estimate_row c = estimate_not_forced( g, P, 5000, 42, "x", 2 );
  CHECK( to_csv_line( a ) == to_csv_line( b ) );
  CHECK( to_csv_line( a ) == to_csv_line( c ) );
  estimate_row d = estimate_not_forced( g, P, 5000, 43, "x", 1 );
  CHECK( a.estimate != d.estimate ); // different seed, different trials
}

TEST_CASE( "lo probe exact values", "[experiments][oracle]" )
{
  // total interval
  std::vector<bigint> ones( 30, 1 );
  CHECK( lo_probe_exact( ones, { 0, 30 } ).estimate == 1.0 );

  // point interval at the binomial center
  std::vector<bigint> w100( 100, 1 );
  double p = lo_probe_exact( w100, { 50, 50 } ).estimate;
  CHECK( p == Catch::Approx( 0.07958923738717877 ).epsilon( 1e-12 ) );

  // enumeration path agrees with the binomial path
  std::vector<bigint> w20( 20, 1 );
  double enumerated = lo_probe_exact( { w20.begin(), w20.end() }, { 10, 10 } ).estimate;
  std::vector<bigint> w20b( 20, 1 );
  w20b[0] = 1; // still all equal; force the general path with a sign trick instead
  std::vector<bigint> mixed = { 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, -1 };
  double direct = lo_probe_exact( mixed, { 9, 9 } ).estimate; // shifted parity of the same distribution
  // P[sum of 19 ones minus one = 9] = P[Bin(19) - Bin(1) = 9]
  bigint cnt = 0;
  for ( int c19 = 0; c19 <= 19; ++c19 )
    for ( int c1 = 0; c1 <= 1; ++c1 )
      if ( c19 - c1 == 9 )
        cnt += binomial( 19, c19 ) * binomial( 1, c1 );
  CHECK( direct == Catch::Approx( exact_ratio( cnt, 20 ) ).epsilon( 1e-12 ) );
  CHECK( enumerated == Catch::Approx( exact_ratio( binomial( 20, 10 ), 20 ) ).epsilon( 1e-12 ) );

  // empty interval
  CHECK( lo_probe_exact( ones, { 5, 4 } ).estimate == 0.0 );
}

TEST_CASE( "lo probe sampling matches its exact value", "[experiments][statistics]" )
{
  std::vector<bigint> w = { 3, -2, 5, 7, -1, 4, 4, -6, 2, 9, 1, -3, 8, 2, -5, 6 };
  lo_interval I{ -2, 4 };
  double exact = lo_probe_exact( w, I ).estimate;
  estimate_row mc = lo_probe_mc( w, I, 40000, 1717 );
  CHECK( std::abs( mc.estimate - exact ) <= 3 * bernoulli_stderr( exact, mc.trials ) );
}

TEST_CASE( "agreement identities", "[experiments]" )
{
  bool_fn p10 = parity_fn( 10 );
  CHECK( agreement_exact( p10, p10, 10 ).estimate == 1.0 );
  CHECK( agreement_exact( p10, not_fn( p10 ), 10 ).estimate == 0.0 );
  estimate_row mc = agreement_mc( p10, p10, 10, 2000, 3 );
  CHECK( mc.estimate == 1.0 );
}

TEST_CASE( "no 2-input LTF beats 75 percent against parity", "[experiments][oracle]" )
{
  bool_fn par2 = parity_fn( 2 );
  double best = 0.0;
  for ( const auto& [tt, w] : enumerate_ltfs( 2 ) )
  {
    auto handle = table_fn( std::make_shared<truth_table>( tt ) );
    best = std::max( best, agreement_exact( handle, par2, 2 ).estimate );
  }
  CHECK( best == 0.75 );
}

TEST_CASE( "approximate-majority margins", "[experiments]" )
{
  // f as a circuit: AND_2
  circuit and2( 2 );
  and2.set_output( and2.add( ltf_over_inputs( { 1, 1 }, 2 ) ) );
  circuit nand2( 2 );
  nand2.set_output( nand2.add( ltf_over_inputs( { -1, -1 }, -1 ) ) );
  circuit zero2( 2 );
  zero2.set_output( zero2.add( make_const( false ) ) );

  bool_fn f = and_fn( 2 );
  CHECK( approx_majority_margin_exact( { &and2 }, f, 2 ).margin == 1.0 );
  CHECK( approx_majority_margin_exact( { &and2, &nand2 }, f, 2 ).margin == 0.5 );
  margin_result m = approx_majority_margin_exact( { &and2, &and2, &and2, &zero2 }, f, 2 );
  CHECK( m.margin == 0.75 );
  CHECK( m.witness_input == 3 ); // the one input where AND_2 = 1
}

TEST_CASE( "survival is zero when the bottom layer is constant", "[experiments]" )
{
  circuit c( 4 );
  uint32_t k0 = c.add( make_const( false ) );
  uint32_t k1 = c.add( make_const( true ) );
  c.set_output( c.add( make_ltf( { { input_ref::gate( k0 ), 1 }, { input_ref::gate( k1 ), 1 } }, 1 ) ) );
  survival_summary s = restriction_survival( c, partition::contiguous( 4, 2 ), 500, 1 );
  CHECK( s.bottom_gates == 0 );
  CHECK( s.mean_gates == 0.0 );
  CHECK( s.max_wires == 0 );
}

TEST_CASE( "survival counts agree with direct classification", "[experiments][oracle]" )
{
  split_rng rng( 31337 );
  for ( int round = 0; round < 20; ++round )
  {
    uint32_t n = 4 + static_cast<uint32_t>( rng.below( 6 ) );
    circuit c = testutil::random_circuit( rng, n, 5, false );
    partition P = partition::contiguous( n, 2 );
    const uint64_t trials = 50;
    survival_summary s = restriction_survival( c, P, trials, round );

    uint64_t expect_sum = 0;
    for ( uint64_t t = 0; t < trials; ++t )
    {
      restriction rho = sample_restriction( P, round, t );
      uint64_t survivors = 0;
      for ( uint32_t gi = 0; gi < c.gates().size(); ++gi )
        if ( c.is_bottom( gi ) && c.gates()[gi].kind != gate_kind::constant )
          survivors += forced_single_input( c.gates()[gi], rho ).kind == forcing_kind::many_inputs;
      expect_sum += survivors;
    }
    REQUIRE( s.mean_gates == Catch::Approx( double( expect_sum ) / double( trials ) ) );
  }
}

TEST_CASE( "parity approximator survival matches per-gate convolution", "[experiments][oracle]" )
{
  // every bottom gate is a threshold-j gate over all 64 inputs; with 8 stars
  // the gate survives iff the fixed-ones count s lies in [j-8, j-1]
  circuit pa = parity_approx_circuit( 64, 2 );
  partition P = partition::contiguous( 64, 8 );

  double expected_mean = 0.0;
  for ( const auto& g : pa.gates() )
  {
    if ( g.wires.size() != 64 )
      continue; // top gate
    int64_t j = static_cast<int64_t>( g.threshold );
    bigint ways = 0;
    for ( int64_t s = std::max<int64_t>( 0, j - 8 ); s <= std::min<int64_t>( 56, j - 1 ); ++s )
      ways += binomial( 56, static_cast<uint64_t>( s ) );
    expected_mean += exact_ratio( ways, 56 );
  }

  survival_summary s = restriction_survival( pa, P, 20000, 2025 );
  double sigma_mean = s.sd_gates / std::sqrt( double( s.trials ) );
  CHECK( std::abs( s.mean_gates - expected_mean ) <= 3 * sigma_mean );
}

TEST_CASE( "survival runs on a depth-3 construction", "[experiments]" )
{
  circuit c = andreev_tc03_circuit( 16 );
  survival_summary s = restriction_survival( c, partition::contiguous( 16, 4 ), 2000, 9 );
  CHECK( s.bottom_gates == 8 ); // the parity ladders
  CHECK( s.mean_gates <= double( s.bottom_gates ) );
  CHECK( s.max_gates <= s.bottom_gates );
  uint64_t hist_total = 0;
  for ( uint64_t h : s.gate_histogram )
    hist_total += h;
  CHECK( hist_total == s.trials );
}

TEST_CASE( "survival mean scales like one over sqrt(n)", "[experiments][statistics]" )
{
  auto mean_for = []( uint32_t n ) {
    circuit c( n );
    std::vector<input_ref> fed;
    for ( int64_t d = -4; d <= 4; ++d )
    {
      std::vector<wire> ws;
      for ( uint32_t j = 0; j < n; ++j )
        ws.push_back( { input_ref::input( j ), 1 } );
      fed.push_back( input_ref::gate( c.add( make_ltf( std::move( ws ), bigint( n / 2 + d ) ) ) ) );
    }
    c.set_output( c.add( make_or( fed ) ) );
    survival_summary s = restriction_survival( c, partition::contiguous( n, 8 ), 4000, 7 );
    return s.mean_gates;
  };
  double m256 = mean_for( 256 ), m1024 = mean_for( 1024 ), m4096 = mean_for( 4096 );
  // halving per 4x growth, within factor 1.5
  CHECK( m256 / m1024 >= 2.0 / 1.5 );
  CHECK( m256 / m1024 <= 2.0 * 1.5 );
  CHECK( m1024 / m4096 >= 2.0 / 1.5 );
  CHECK( m1024 / m4096 <= 2.0 * 1.5 );
}

TEST_CASE( "forcing envelope over the majority and random-gate grid", "[experiments][statistics]" )
{
  // fit the constant on the smallest grid point, then assert the envelope
  // across the rest with tolerance 1.5x
  const uint64_t trials = 10000;
  estimate_row fit = estimate_not_forced( maj_over_inputs( 256 ), partition::contiguous( 256, 2 ), trials, 11 );
  double c_fit = fit.estimate * 16.0 / 2.0; // sqrt(256)/|P|
  double c_env = 1.5 * c_fit;
  double c_low = c_fit / 1.5;

  split_rng rng( 5150 );
  for ( uint32_t n : { 256u, 1024u, 4096u } )
  {
    double sq = std::sqrt( double( n ) );
    for ( uint32_t parts : { 2u, 4u, 8u, 16u } )
    {
      partition P = partition::contiguous( n, parts );
      estimate_row maj = estimate_not_forced( maj_over_inputs( n ), P, trials, 11 );
      double bound = c_env * double( parts ) / sq;
      CHECK( maj.estimate <= bound + 3 * maj.stderr_value );
      if ( double( parts ) <= sq / 10.0 )
        CHECK( maj.estimate >= c_low * double( parts ) / sq - 3 * maj.stderr_value );

      // a couple of random integer-weight gates per grid point
      for ( int round = 0; round < 2; ++round )
      {
        std::vector<bigint> w( n );
        bigint total = 0;
        for ( auto& wi : w )
        {
          wi = 1 + rng.below( 50 );
          total += wi;
        }
        gate g = ltf_over_inputs( w, total / 2 ); // centered threshold, worst case
        estimate_row rr = estimate_not_forced( g, P, 2000, 12 + round );
        CHECK( rr.estimate <= bound + 3 * rr.stderr_value );
      }
    }
  }
}

TEST_CASE( "single-input forcing envelope in w |P|^{3/2} / n^{3/2}", "[experiments][statistics]" )
{
  // a MAJ gate over half the inputs, parts spread round-robin
  auto not_single_fraction = []( uint32_t n, uint32_t parts, uint64_t trials, uint64_t seed ) {
    uint32_t w = n / 2;
    circuit c( n );
    std::vector<input_ref> refs;
    for ( uint32_t j = 0; j < w; ++j )
      refs.push_back( input_ref::input( j ) );
    uint32_t id = c.add( make_maj( refs ) );
    c.set_output( c.add( make_ltf( { { input_ref::gate( id ), 1 } }, 1 ) ) );
    survival_summary s = restriction_survival( c, partition::round_robin( n, parts ), trials, seed );
    return s.mean_gates; // one bottom gate: mean = fraction not forced to <= 1 input
  };

  const uint64_t trials = 20000;
  double fit = not_single_fraction( 256, 2, trials, 21 );
  double c_fit = fit * std::pow( 256.0, 1.5 ) / ( 128.0 * std::pow( 2.0, 1.5 ) );
  for ( uint32_t n : { 256u, 1024u, 4096u } )
    for ( uint32_t parts : { 2u, 4u, 8u, 16u } )
    {
      double frac = not_single_fraction( n, parts, 10000, 22 );
      double bound = 1.5 * c_fit * ( double( n / 2 ) * std::pow( double( parts ), 1.5 ) / std::pow( double( n ), 1.5 ) );
      CHECK( frac <= bound + 3 * std::sqrt( frac * ( 1 - frac ) / 10000.0 ) + 1e-9 );
    }
}

TEST_CASE( "CSV rows round-trip through the reader", "[experiments]" )
{
  std::vector<estimate_row> rows = {
      { "alpha", 256, 4, 1000, 0.125, bernoulli_stderr( 0.125, 1000 ), 99 },
      { "beta", 1024, 2, 500, 0.5, bernoulli_stderr( 0.5, 500 ), 7 },
  };
  std::ostringstream os;
  write_csv( os, rows, { "meta line" } );
  std::istringstream is( os.str() );
  auto parsed = parse_csv( is );
  REQUIRE( parsed.size() == rows.size() );
  for ( size_t i = 0; i < rows.size(); ++i )
  {
    CHECK( parsed[i].label == rows[i].label );
    CHECK( parsed[i].n == rows[i].n );
    CHECK( parsed[i].parts == rows[i].parts );
    CHECK( parsed[i].trials == rows[i].trials );
    CHECK( parsed[i].estimate == rows[i].estimate );
    CHECK( parsed[i].stderr_value == rows[i].stderr_value );
    CHECK( parsed[i].seed == rows[i].seed );
  }
  CHECK_THROWS_AS( [] { std::istringstream bad( "nope\n" ); return parse_csv( bad ); }(), parse_error );
}

TEST_CASE( "estimate rows carry the binomial standard error", "[experiments]" )
{
  estimate_row r = estimate_not_forced( maj_over_inputs( 16 ), partition::contiguous( 16, 2 ), 4000, 1 );
  CHECK( r.stderr_value == Catch::Approx( bernoulli_stderr( r.estimate, 4000 ) ) );
  CHECK( r.estimate >= 0.0 );
  CHECK( r.estimate <= 1.0 );
}
