#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <ltflab/biased.hpp>
#include <ltflab/chow.hpp>
#include <ltflab/circuit.hpp>
#include <ltflab/circuit_io.hpp>
#include <ltflab/constructions.hpp>
#include <ltflab/experiments.hpp>
#include <ltflab/functions.hpp>
#include <ltflab/restriction.hpp>
#include <ltflab/version.hpp>

namespace
{

using namespace ltflab;

constexpr int exit_ok = 0;
constexpr int exit_flags = 2;
constexpr int exit_capacity = 3;

uint64_t fnv1a( const std::string& s )
{
  uint64_t h = 0xcbf29ce484222325ull;
  for ( unsigned char c : s )
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct run_context
{
  uint64_t seed = 0;
  unsigned jobs = 1;
  std::string metadata;

  std::vector<std::string> file_comments() const
  {
    return { metadata };
  }
};

void print_metadata( const run_context& ctx )
{
  std::cout << "# " << ctx.metadata << "\n";
}

std::string read_file( const std::string& path )
{
  std::ifstream is( path );
  if ( !is )
    throw parse_error( "cannot open '" + path + "'" );
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file( const std::string& path, const std::string& content )
{
  std::ofstream os( path );
  if ( !os )
    throw parse_error( "cannot open '" + path + "' for writing" );
  os << content;
}

std::vector<uint64_t> parse_u64_list( const std::string& s )
{
  std::vector<uint64_t> vals;
  std::istringstream is( s );
  std::string part;
  while ( std::getline( is, part, ',' ) )
    vals.push_back( std::stoull( part ) );
  return vals;
}

std::vector<bigint> parse_bigint_list( const std::string& s )
{
  std::vector<bigint> vals;
  std::istringstream is( s );
  std::string part;
  while ( std::getline( is, part, ',' ) )
    vals.push_back( bigint( part ) );
  return vals;
}

uint64_t parse_bits( const std::string& s )
{
  if ( s.size() > 64 )
    throw parse_error( "bit string longer than 64" );
  uint64_t bits = 0;
  for ( size_t i = 0; i < s.size(); ++i )
  {
    if ( s[i] == '1' )
      bits |= uint64_t( 1 ) << i;
    else if ( s[i] != '0' )
      throw parse_error( "bit string must be over {0,1}, x_0 first" );
  }
  return bits;
}

bool_fn resolve_function( const std::string& name, uint32_t n )
{
  if ( !name.empty() && name[0] == '@' )
  {
    auto c = std::make_shared<circuit>( parse_circuit( read_file( name.substr( 1 ) ) ) );
    if ( c->num_inputs() != n )
      throw parse_error( "circuit '" + name + "' has " + std::to_string( c->num_inputs() ) + " inputs, expected " +
                         std::to_string( n ) );
    return circuit_fn( c );
  }
  return named_function( name, n );
}

void emit_csv( const run_context& ctx, const std::vector<estimate_row>& rows, const std::string& out_path )
{
  if ( out_path.empty() )
  {
    // the metadata line is already on stdout
    write_csv( std::cout, rows );
  }
  else
  {
    std::ostringstream os;
    write_csv( os, rows, ctx.file_comments() );
    write_file( out_path, os.str() );
  }
}

std::string pdt_text( const parity_decision_tree& t )
{
  std::ostringstream os;
  os << "pdt inputs=" << t.num_inputs() << " depth=" << t.depth() << " nodes=" << t.nodes().size() << "\n";
  for ( size_t i = 0; i < t.nodes().size(); ++i )
  {
    const auto& nd = t.nodes()[i];
    auto child = []( int32_t c ) {
      if ( c == parity_decision_tree::leaf_zero )
        return std::string( "leaf0" );
      if ( c == parity_decision_tree::leaf_one )
        return std::string( "leaf1" );
      return "n" + std::to_string( c );
    };
    os << "node n" << i << " query=";
    bool first = true;
    for ( uint32_t v = 0; v < 64; ++v )
      if ( ( nd.query >> v ) & 1 )
      {
        os << ( first ? "" : "," ) << "x" << v;
        first = false;
      }
    os << " zero=" << child( nd.child[0] ) << " one=" << child( nd.child[1] ) << "\n";
  }
  return os.str();
}

int cmd_build( const run_context& ctx, const std::string& func, uint64_t n, uint32_t c, const std::string& out )
{
  if ( func == "andreev-pdt" )
  {
    auto tree = andreev_pdt( n );
    std::string text = pdt_text( tree );
    print_metadata( ctx );
    std::cout << "depth=" << tree.depth() << " nodes=" << tree.nodes().size() << "\n";
    if ( out.empty() )
      std::cout << text;
    else
      write_file( out, "# " + ctx.metadata + "\n" + text );
    return exit_ok;
  }

  circuit built( 0 );
  if ( func == "parity-approx" )
    built = parity_approx_circuit( static_cast<uint32_t>( n ), c );
  else if ( func == "andreev-tc03" )
    built = andreev_tc03_circuit( n );
  else if ( func == "andreev-ltf2" )
    built = andreev_ltf2_circuit( n );
  else if ( func == "andreev-mod3mod2" )
    built = andreev_mod3mod2( n );
  else
    throw parse_error( "unknown construction '" + func + "'" );

  auto [gates, wires] = size_metrics( built );
  print_metadata( ctx );
  std::cout << "gates=" << gates << " wires=" << wires << "\n";
  std::string text = serialize_circuit( built );
  if ( out.empty() )
    std::cout << text;
  else
    write_file( out, "# " + ctx.metadata + "\n" + text );
  return exit_ok;
}

int cmd_eval( const run_context& ctx, const std::string& circuit_path, const std::string& func, uint32_t n,
              const std::string& input_bits, bool table )
{
  print_metadata( ctx );
  if ( !circuit_path.empty() )
  {
    circuit c = parse_circuit( read_file( circuit_path ) );
    if ( table )
    {
      std::cout << "table=" << c.table().to_hex() << "\n";
    }
    else
    {
      if ( input_bits.size() != c.num_inputs() )
        throw parse_error( "--input must supply exactly " + std::to_string( c.num_inputs() ) + " bits" );
      std::cout << "value=" << ( c.eval_bits( parse_bits( input_bits ) ) ? 1 : 0 ) << "\n";
    }
    return exit_ok;
  }
  bool_fn f = resolve_function( func, n );
  if ( table )
  {
    truth_table tt( n );
    for ( uint64_t x = 0; x < tt.num_rows(); ++x )
      tt.set( x, f( x ) );
    std::cout << "table=" << tt.to_hex() << "\n";
  }
  else
  {
    if ( input_bits.size() != n )
      throw parse_error( "--input must supply exactly " + std::to_string( n ) + " bits" );
    std::cout << "value=" << ( f( parse_bits( input_bits ) ) ? 1 : 0 ) << "\n";
  }
  return exit_ok;
}

int cmd_restrict( const run_context& ctx, const std::string& circuit_path, uint32_t parts, uint64_t trials,
                  const std::string& out )
{
  circuit c = parse_circuit( read_file( circuit_path ) );
  partition P = partition::contiguous( c.num_inputs(), parts );
  survival_summary s = restriction_survival( c, P, trials, ctx.seed, ctx.jobs );

  std::vector<estimate_row> rows;
  double gfrac = s.bottom_gates ? s.mean_gates / double( s.bottom_gates ) : 0.0;
  double wfrac = s.bottom_wires ? s.mean_wires / double( s.bottom_wires ) : 0.0;
  rows.push_back( { "gates_frac_mean", c.num_inputs(), parts, trials, gfrac,
                    s.bottom_gates ? s.sd_gates / ( std::sqrt( double( trials ) ) * double( s.bottom_gates ) ) : 0.0,
                    ctx.seed } );
  rows.push_back( { "wires_frac_mean", c.num_inputs(), parts, trials, wfrac,
                    s.bottom_wires ? s.sd_wires / ( std::sqrt( double( trials ) ) * double( s.bottom_wires ) ) : 0.0,
                    ctx.seed } );
  rows.push_back( { "gates_frac_max", c.num_inputs(), parts, trials,
                    s.bottom_gates ? double( s.max_gates ) / double( s.bottom_gates ) : 0.0, 0.0, ctx.seed } );
  for ( size_t k = 0; k < s.gate_histogram.size(); ++k )
    if ( s.gate_histogram[k] )
    {
      double p = double( s.gate_histogram[k] ) / double( trials );
      rows.push_back( { "hist_g" + std::to_string( k ), c.num_inputs(), parts, trials, p,
                        bernoulli_stderr( p, trials ), ctx.seed } );
    }
  print_metadata( ctx );
  std::cout << "bottom_gates=" << s.bottom_gates << " mean_surviving=" << format_double( s.mean_gates )
            << " max_surviving=" << s.max_gates << "\n";
  emit_csv( ctx, rows, out );
  return exit_ok;
}

int cmd_forcing( const run_context& ctx, const std::string& n_grid, const std::string& parts_grid,
                 const std::string& weights, const std::string& threshold, uint64_t trials, const std::string& out )
{
  std::vector<estimate_row> rows;
  if ( !weights.empty() )
  {
    auto w = parse_bigint_list( weights );
    gate g = ltf_over_inputs( w, bigint( threshold ) );
    for ( uint64_t parts : parse_u64_list( parts_grid ) )
    {
      partition P = partition::contiguous( static_cast<uint32_t>( w.size() ), static_cast<uint32_t>( parts ) );
      rows.push_back( estimate_not_forced( g, P, trials, ctx.seed, "not_forced_ltf", ctx.jobs ) );
    }
  }
  else
  {
    for ( uint64_t n : parse_u64_list( n_grid ) )
    {
      gate g = maj_over_inputs( static_cast<uint32_t>( n ) );
      for ( uint64_t parts : parse_u64_list( parts_grid ) )
      {
        partition P = partition::contiguous( static_cast<uint32_t>( n ), static_cast<uint32_t>( parts ) );
        rows.push_back( estimate_not_forced( g, P, trials, ctx.seed, "not_forced_maj", ctx.jobs ) );
      }
    }
  }
  print_metadata( ctx );
  emit_csv( ctx, rows, out );
  return exit_ok;
}

int cmd_lo( const run_context& ctx, const std::string& weights, uint64_t uniform_n, const std::string& lo,
            const std::string& hi, bool exact, uint64_t trials, const std::string& out )
{
  std::vector<bigint> w;
  if ( uniform_n )
    w.assign( uniform_n, 1 );
  else
    w = parse_bigint_list( weights );
  lo_interval I{ bigint( lo ), bigint( hi ) };
  estimate_row row = exact ? lo_probe_exact( w, I ) : lo_probe_mc( w, I, trials, ctx.seed, "lo", ctx.jobs );
  print_metadata( ctx );
  std::cout << "estimate=" << format_double( row.estimate ) << "\n";
  emit_csv( ctx, { row }, out );
  return exit_ok;
}

int cmd_agree( const run_context& ctx, const std::string& f_name, const std::string& g_name, uint32_t n, bool exact,
               uint64_t trials, bool margin, const std::string& circuits_list, const std::string& out )
{
  print_metadata( ctx );
  if ( margin )
  {
    std::vector<std::shared_ptr<circuit>> owned;
    std::vector<const circuit*> ptrs;
    std::istringstream is( circuits_list );
    std::string path;
    while ( std::getline( is, path, ',' ) )
    {
      owned.push_back( std::make_shared<circuit>( parse_circuit( read_file( path ) ) ) );
      ptrs.push_back( owned.back().get() );
    }
    bool_fn f = resolve_function( f_name, n );
    margin_result m = exact ? approx_majority_margin_exact( ptrs, f, n )
                            : approx_majority_margin_mc( ptrs, f, n, trials, ctx.seed );
    std::cout << "margin=" << format_double( m.margin ) << " witness=" << m.witness_input << "\n";
    return exit_ok;
  }
  bool_fn f = resolve_function( f_name, n );
  bool_fn g = resolve_function( g_name, n );
  estimate_row row = exact ? agreement_exact( f, g, n ) : agreement_mc( f, g, n, trials, ctx.seed, "agree", ctx.jobs );
  std::cout << "estimate=" << format_double( row.estimate ) << "\n";
  emit_csv( ctx, { row }, out );
  return exit_ok;
}

int cmd_enumerate_ltf( const run_context& ctx, uint32_t n, const std::string& out )
{
  auto ltfs = enumerate_ltfs( n );
  print_metadata( ctx );
  std::ostringstream os;
  for ( const auto& [tt, w] : ltfs )
  {
    os << tt.to_hex() << " " << w.threshold;
    for ( int64_t wi : w.weights )
      os << " " << wi;
    os << "\n";
  }
  std::cout << "count=" << ltfs.size() << "\n";
  if ( out.empty() )
    std::cout << os.str();
  else
    write_file( out, os.str() );
  return exit_ok;
}

int cmd_chow( const run_context& ctx, const std::string& circuit_path, const std::string& func, uint32_t n )
{
  truth_table tt( 0 );
  if ( !circuit_path.empty() )
  {
    circuit c = parse_circuit( read_file( circuit_path ) );
    tt = c.table();
  }
  else
  {
    bool_fn f = resolve_function( func, n );
    tt = truth_table( n );
    for ( uint64_t x = 0; x < tt.num_rows(); ++x )
      tt.set( x, f( x ) );
  }
  chow_vector cv = chow( tt );
  print_metadata( ctx );
  std::cout << "chow";
  for ( int64_t v : cv.scaled )
    std::cout << " " << v;
  std::cout << "\n";
  return exit_ok;
}

int cmd_biased( const run_context& ctx, unsigned t, unsigned r, const std::string& export_path,
                const std::string& bias_mode, uint64_t samples, const std::string& profile_path, double theta )
{
  biased_matrix A = biased_matrix::build( t, r );
  print_metadata( ctx );
  auto [bn, bd] = A.bias_bound();
  std::cout << "t=" << t << " r=" << r << " m=" << A.m() << " bound=" << bn << "/" << bd << "\n";
  if ( !export_path.empty() )
    write_file( export_path, A.serialize() );
  if ( bias_mode == "exhaustive" )
  {
    bias_result b = bias_of_exhaustive( A );
    std::cout << "bias=" << format_double( b.value() ) << " worst_v=" << b.worst_v
              << " within_bound=" << ( b.at_most( bn, bd ) ? 1 : 0 ) << "\n";
  }
  else if ( bias_mode == "sampled" )
  {
    bias_result b = bias_of_sampled( A, samples, ctx.seed );
    std::cout << "bias=" << format_double( b.value() ) << " worst_v=" << b.worst_v << "\n";
  }
  if ( !profile_path.empty() )
  {
    std::string hex = read_file( profile_path );
    while ( !hex.empty() && ( hex.back() == '\n' || hex.back() == '\r' ) )
      hex.pop_back();
    uint64_t m = A.m();
    std::vector<uint64_t> T( ( m + 63 ) / 64, 0 );
    if ( hex.size() != ( m + 3 ) / 4 )
      throw parse_error( "profile target must have exactly m bits in hex" );
    for ( uint64_t i = 0; i < m; ++i )
    {
      char c = hex[i / 4];
      unsigned v = c <= '9' ? c - '0' : 10 + ( c - 'a' );
      if ( ( v >> ( 3 - i % 4 ) ) & 1 )
        T[i >> 6] |= uint64_t( 1 ) << ( i & 63 );
    }
    profile_result pr = correlation_profile_exhaustive( A, T, theta );
    std::cout << "exceeders=" << pr.exceeders << " max_dev=" << format_double( double( pr.max_deviation ) / ( 2.0 * double( m ) ) )
              << "\n";
  }
  return exit_ok;
}

int cmd_b_eval( const run_context& ctx, uint32_t n, uint32_t k, const std::string& x_bits, const std::string& a_bits,
                bool table )
{
  b_function B( n, k );
  print_metadata( ctx );
  if ( table )
  {
    if ( 2 * n > 24 )
      throw capacity_error( "b-eval: table mode needs 2n <= 24" );
    truth_table tt( 2 * n );
    for ( uint64_t xa = 0; xa < tt.num_rows(); ++xa )
      tt.set( xa, B.eval_packed( xa ) );
    std::cout << "table=" << tt.to_hex() << "\n";
  }
  else
  {
    if ( x_bits.size() != n || a_bits.size() != n )
      throw parse_error( "b-eval: --x and --a must each supply n bits" );
    std::cout << "value=" << ( B.eval( parse_bits( x_bits ), parse_bits( a_bits ) ) ? 1 : 0 ) << "\n";
  }
  return exit_ok;
}

/*! Loads key=value lines; a key also present on the command line is an
 * error rather than a silent override. */
std::vector<std::string> apply_config_file( const std::vector<std::string>& args )
{
  std::string config_path;
  for ( size_t i = 0; i < args.size(); ++i )
  {
    if ( args[i] == "--config" && i + 1 < args.size() )
      config_path = args[i + 1];
    else if ( args[i].rfind( "--config=", 0 ) == 0 )
      config_path = args[i].substr( 9 );
  }
  if ( config_path.empty() )
    return args;

  std::vector<std::string> out = args;
  std::istringstream is( read_file( config_path ) );
  std::string line;
  size_t line_no = 0;
  while ( std::getline( is, line ) )
  {
    ++line_no;
    if ( auto h = line.find( '#' ); h != std::string::npos )
      line.resize( h );
    while ( !line.empty() && isspace( static_cast<unsigned char>( line.back() ) ) )
      line.pop_back();
    if ( line.empty() )
      continue;
    auto eq = line.find( '=' );
    if ( eq == std::string::npos )
      throw parse_error( "config line " + std::to_string( line_no ) + ": expected key=value" );
    std::string key = line.substr( 0, eq );
    std::string flag = "--" + key;
    for ( const auto& a : args )
      if ( a == flag || a.rfind( flag + "=", 0 ) == 0 )
        throw parse_error( "config key '" + key + "' conflicts with an explicit flag" );
    out.push_back( flag + "=" + line.substr( eq + 1 ) );
  }
  return out;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "threshold-circuit laboratory" };
  app.require_subcommand( 1 );

  run_context ctx;
  const char* env_seed = std::getenv( "LTFLAB_SEED" );
  ctx.seed = env_seed ? std::strtoull( env_seed, nullptr, 10 ) : 0;

  app.add_option( "--seed", ctx.seed, "PRNG seed (default: LTFLAB_SEED or 0)" );
  app.add_option( "--jobs", ctx.jobs, "worker threads for trial-parallel subcommands" )->check( CLI::Range( 1u, 64u ) );
  std::string config_path;
  app.add_option( "--config", config_path, "key=value file; conflicts with explicit flags are errors" );

  // build
  auto* build = app.add_subcommand( "build", "emit a construction circuit" );
  std::string build_func, build_out;
  uint64_t build_n = 8;
  uint32_t build_c = 2;
  build->add_option( "--func", build_func, "parity-approx | andreev-tc03 | andreev-ltf2 | andreev-pdt | andreev-mod3mod2" )
      ->required();
  build->add_option( "--n", build_n, "input count" )->required();
  build->add_option( "--c", build_c, "window constant for parity-approx" );
  build->add_option( "-o,--out", build_out, "output file (stdout when absent)" );

  // eval
  auto* eval = app.add_subcommand( "eval", "truth table / single-point evaluation" );
  std::string eval_circuit, eval_func, eval_input;
  uint32_t eval_n = 0;
  bool eval_table = false;
  eval->add_option( "--circuit", eval_circuit, "circuit file" );
  eval->add_option( "--func", eval_func, "named function (with --n)" );
  eval->add_option( "--n", eval_n, "input count for --func" );
  eval->add_option( "--input", eval_input, "assignment bits, x0 first" );
  eval->add_flag( "--table", eval_table, "print the full table as hex" );

  // restrict
  auto* restrict_cmd = app.add_subcommand( "restrict", "restriction survival experiment" );
  std::string restrict_circuit, restrict_out;
  uint32_t restrict_parts = 2;
  uint64_t restrict_trials = 100000;
  restrict_cmd->add_option( "--circuit", restrict_circuit, "circuit file" )->required();
  restrict_cmd->add_option( "--parts", restrict_parts, "partition part count" )->required();
  restrict_cmd->add_option( "--trials", restrict_trials, "Monte Carlo trials" );
  restrict_cmd->add_option( "-o,--out", restrict_out, "CSV output file" );

  // forcing
  auto* forcing = app.add_subcommand( "forcing", "estimate_not_forced grid" );
  std::string forcing_n_grid = "256,1024,4096", forcing_parts_grid = "2,4,8,16", forcing_weights, forcing_t = "0",
              forcing_out;
  uint64_t forcing_trials = 100000;
  forcing->add_option( "--n-grid", forcing_n_grid, "comma list of n (MAJ_n gates)" );
  forcing->add_option( "--parts-grid", forcing_parts_grid, "comma list of part counts" );
  forcing->add_option( "--weights", forcing_weights, "explicit LTF weights (overrides the MAJ grid)" );
  forcing->add_option( "--t", forcing_t, "threshold for --weights" );
  forcing->add_option( "--trials", forcing_trials, "trials per grid point" );
  forcing->add_option( "-o,--out", forcing_out, "CSV output file" );

  // lo
  auto* lo = app.add_subcommand( "lo", "anti-concentration probe" );
  std::string lo_weights, lo_lo = "0", lo_hi = "0", lo_out;
  uint64_t lo_uniform = 0, lo_trials = 100000;
  bool lo_exact = false;
  lo->add_option( "--weights", lo_weights, "comma list of integer weights" );
  lo->add_option( "--uniform", lo_uniform, "n unit weights" );
  lo->add_option( "--lo", lo_lo, "interval lower end (closed)" );
  lo->add_option( "--hi", lo_hi, "interval upper end (closed)" );
  lo->add_flag( "--exact", lo_exact, "exact mode (n <= 28 or all-equal weights)" );
  lo->add_option( "--trials", lo_trials, "Monte Carlo trials" );
  lo->add_option( "-o,--out", lo_out, "CSV output file" );

  // agree
  auto* agree = app.add_subcommand( "agree", "agreement fraction / approximate-majority margin" );
  std::string agree_f, agree_g, agree_circuits, agree_out;
  uint32_t agree_n = 0;
  uint64_t agree_trials = 100000;
  bool agree_exact = false, agree_margin = false;
  agree->add_option( "--f", agree_f, "function name or @circuit-file" )->required();
  agree->add_option( "--g", agree_g, "second function (agreement mode)" );
  agree->add_option( "--n", agree_n, "input count" )->required();
  agree->add_flag( "--exact", agree_exact, "exact mode" );
  agree->add_option( "--trials", agree_trials, "Monte Carlo trials" );
  agree->add_flag( "--margin", agree_margin, "approximate-majority margin mode" );
  agree->add_option( "--circuits", agree_circuits, "comma list of circuit files (margin mode)" );
  agree->add_option( "-o,--out", agree_out, "CSV output file" );

  // enumerate-ltf
  auto* enum_ltf = app.add_subcommand( "enumerate-ltf", "all LTFs on n inputs" );
  uint32_t enum_n = 2;
  std::string enum_out;
  enum_ltf->add_option( "--n", enum_n, "input count (<= 4)" )->required();
  enum_ltf->add_option( "-o,--out", enum_out, "output file" );

  // chow
  auto* chow_cmd = app.add_subcommand( "chow", "scaled degree <= 1 Fourier coefficients" );
  std::string chow_circuit, chow_func;
  uint32_t chow_n = 0;
  chow_cmd->add_option( "--circuit", chow_circuit, "circuit file" );
  chow_cmd->add_option( "--func", chow_func, "named function (with --n)" );
  chow_cmd->add_option( "--n", chow_n, "input count for --func" );

  // biased
  auto* biased = app.add_subcommand( "biased", "small-bias matrix tools" );
  unsigned biased_t = 4, biased_r = 4;
  std::string biased_export, biased_bias, biased_profile;
  uint64_t biased_samples = 1000;
  double biased_theta = 0.49;
  biased->add_option( "--t", biased_t, "columns" )->required();
  biased->add_option( "--r", biased_r, "field degree (m = 2^{2r})" )->required();
  biased->add_option( "--export", biased_export, "write the matrix to a file" );
  biased->add_option( "--bias", biased_bias, "exhaustive | sampled" );
  biased->add_option( "--samples", biased_samples, "sampled-mode test count" );
  biased->add_option( "--profile-target", biased_profile, "hex file with an m-bit target string" );
  biased->add_option( "--theta", biased_theta, "profile deviation threshold" );

  // b-eval
  auto* beval = app.add_subcommand( "b-eval", "evaluate the coded multiplexer function" );
  uint32_t beval_n = 8, beval_k = 4;
  std::string beval_x, beval_a;
  bool beval_table = false;
  beval->add_option( "--n", beval_n, "half input size" )->required();
  beval->add_option( "--k", beval_k, "address bits (even, divides n)" )->required();
  beval->add_option( "--x", beval_x, "x bits" );
  beval->add_option( "--a", beval_a, "a bits" );
  beval->add_flag( "--table", beval_table, "full table over packed (x,a)" );

  for ( auto* sub : app.get_subcommands( []( const CLI::App* ) { return true; } ) )
    sub->fallthrough();

  std::vector<std::string> args( argv + 1, argv + argc );
  try
  {
    args = apply_config_file( args );
  }
  catch ( const std::exception& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_flags;
  }

  try
  {
    std::vector<const char*> cargs;
    cargs.push_back( argv[0] );
    for ( const auto& a : args )
      cargs.push_back( a.c_str() );
    app.parse( static_cast<int>( cargs.size() ), cargs.data() );
  }
  catch ( const CLI::ParseError& e )
  {
    return app.exit( e ) ? exit_flags : exit_ok;
  }

  // the config hash identifies the experiment: output location and worker
  // count do not change results, so they stay out of the hash
  std::string joined;
  for ( size_t i = 0; i < args.size(); ++i )
  {
    const std::string& a = args[i];
    if ( a == "-o" || a == "--out" || a == "--jobs" )
    {
      ++i;
      continue;
    }
    if ( a.rfind( "--out=", 0 ) == 0 || a.rfind( "--jobs=", 0 ) == 0 || a.rfind( "-o=", 0 ) == 0 )
      continue;
    joined += a;
    joined += '\0';
  }
  char hash_hex[32];
  std::snprintf( hash_hex, sizeof hash_hex, "%016llx",
                 static_cast<unsigned long long>( fnv1a( joined + std::to_string( ctx.seed ) ) ) );
  ctx.metadata = std::string( "ltflab " ) + version_string + " seed=" + std::to_string( ctx.seed ) +
                 " config=" + hash_hex;

  try
  {
    if ( build->parsed() )
      return cmd_build( ctx, build_func, build_n, build_c, build_out );
    if ( eval->parsed() )
      return cmd_eval( ctx, eval_circuit, eval_func, eval_n, eval_input, eval_table );
    if ( restrict_cmd->parsed() )
      return cmd_restrict( ctx, restrict_circuit, restrict_parts, restrict_trials, restrict_out );
    if ( forcing->parsed() )
      return cmd_forcing( ctx, forcing_n_grid, forcing_parts_grid, forcing_weights, forcing_t, forcing_trials,
                          forcing_out );
    if ( lo->parsed() )
      return cmd_lo( ctx, lo_weights, lo_uniform, lo_lo, lo_hi, lo_exact, lo_trials, lo_out );
    if ( agree->parsed() )
      return cmd_agree( ctx, agree_f, agree_g, agree_n, agree_exact, agree_trials, agree_margin, agree_circuits,
                        agree_out );
    if ( enum_ltf->parsed() )
      return cmd_enumerate_ltf( ctx, enum_n, enum_out );
    if ( chow_cmd->parsed() )
      return cmd_chow( ctx, chow_circuit, chow_func, chow_n );
    if ( biased->parsed() )
      return cmd_biased( ctx, biased_t, biased_r, biased_export, biased_bias, biased_samples, biased_profile,
                         biased_theta );
    if ( beval->parsed() )
      return cmd_b_eval( ctx, beval_n, beval_k, beval_x, beval_a, beval_table );
  }
  catch ( const capacity_error& e )
  {
    std::cerr << "capacity error: " << e.what() << "\n";
    return exit_capacity;
  }
  catch ( const std::exception& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_flags;
  }
  return exit_flags;
}
