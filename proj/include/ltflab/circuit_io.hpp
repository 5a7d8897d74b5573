#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"

namespace ltflab
{

/*! \brief Canonical textual circuit form.
 *
 * One item per line: `circuit <name>`, `inputs <n>`, then gates in
 * topological order as `gate <id> <KIND> [t=<int>] [accept=<r,...>]
 * w=<ref>:<int>,...` where `<ref>` is `x<j>` or an earlier gate id, and a
 * final `output <id>`. `#` starts a comment. Serialization always emits ids
 * g0, g1, ... so serialize(parse(serialize(c))) == serialize(c).
 */
inline std::string serialize_circuit( const circuit& c )
{
  std::ostringstream os;
  os << "circuit " << ( c.name().empty() ? "c" : c.name() ) << "\n";
  os << "inputs " << c.num_inputs() << "\n";
  for ( size_t i = 0; i < c.gates().size(); ++i )
  {
    const gate& g = c.gates()[i];
    os << "gate g" << i << " " << kind_name( g.kind );
    if ( g.kind == gate_kind::mod2 || g.kind == gate_kind::mod3 )
    {
      os << " accept=";
      for ( size_t a = 0; a < g.accept.size(); ++a )
        os << ( a ? "," : "" ) << g.accept[a];
    }
    else
    {
      os << " t=" << g.threshold;
    }
    if ( !g.wires.empty() )
    {
      os << " w=";
      for ( size_t w = 0; w < g.wires.size(); ++w )
      {
        const auto& wire = g.wires[w];
        os << ( w ? "," : "" );
        if ( wire.ref.is_input() )
          os << "x" << wire.ref.index;
        else
          os << "g" << wire.ref.index;
        os << ":" << wire.weight;
      }
    }
    os << "\n";
  }
  os << "output g" << c.output() << "\n";
  return os.str();
}

namespace detail
{

inline std::vector<std::string> split_tokens( const std::string& line )
{
  std::vector<std::string> toks;
  std::istringstream is( line );
  std::string t;
  while ( is >> t )
    toks.push_back( t );
  return toks;
}

inline bigint parse_bigint( const std::string& s, size_t line_no )
{
  try
  {
    return bigint( s );
  }
  catch ( const std::exception& )
  {
    throw parse_error( "line " + std::to_string( line_no ) + ": bad integer '" + s + "'" );
  }
}

} // namespace detail

inline circuit parse_circuit( const std::string& text )
{
  std::istringstream is( text );
  std::string raw;
  size_t line_no = 0;

  std::string name;
  bool have_name = false, have_inputs = false, have_output = false;
  uint32_t num_inputs = 0;
  std::vector<std::pair<std::string, gate>> pending; // (id, gate)
  std::map<std::string, uint32_t> ids;
  std::string output_id;

  auto fail = [&]( const std::string& msg ) -> void {
    throw parse_error( "line " + std::to_string( line_no ) + ": " + msg );
  };

  while ( std::getline( is, raw ) )
  {
    ++line_no;
    if ( auto h = raw.find( '#' ); h != std::string::npos )
      raw.resize( h );
    auto toks = detail::split_tokens( raw );
    if ( toks.empty() )
      continue;

    if ( toks[0] == "circuit" )
    {
      if ( have_name || toks.size() != 2 )
        fail( "expected single 'circuit <name>' header" );
      name = toks[1];
      have_name = true;
    }
    else if ( toks[0] == "inputs" )
    {
      if ( !have_name || have_inputs || toks.size() != 2 )
        fail( "expected 'inputs <n>' after the circuit header" );
      num_inputs = static_cast<uint32_t>( std::stoul( toks[1] ) );
      have_inputs = true;
    }
    else if ( toks[0] == "gate" )
    {
      if ( !have_inputs || have_output )
        fail( "gate line outside circuit body" );
      if ( toks.size() < 3 )
        fail( "expected 'gate <id> <KIND> ...'" );
      const std::string& id = toks[1];
      if ( ids.count( id ) )
        fail( "duplicate gate id '" + id + "'" );

      gate_kind kind;
      const std::string& ks = toks[2];
      if ( ks == "LTF" )
        kind = gate_kind::ltf;
      else if ( ks == "MAJ" )
        kind = gate_kind::maj;
      else if ( ks == "AND" )
        kind = gate_kind::and_gate;
      else if ( ks == "OR" )
        kind = gate_kind::or_gate;
      else if ( ks == "MOD2" )
        kind = gate_kind::mod2;
      else if ( ks == "MOD3" )
        kind = gate_kind::mod3;
      else if ( ks == "CONST" )
        kind = gate_kind::constant;
      else
      {
        fail( "unknown gate kind '" + ks + "'" );
        return circuit( 0 ); // unreachable
      }

      bool have_t = false;
      bigint t = 0;
      std::vector<int> accept;
      bool have_accept = false;
      std::vector<wire> wires;

      for ( size_t i = 3; i < toks.size(); ++i )
      {
        const std::string& f = toks[i];
        if ( f.rfind( "t=", 0 ) == 0 )
        {
          t = detail::parse_bigint( f.substr( 2 ), line_no );
          have_t = true;
        }
        else if ( f.rfind( "accept=", 0 ) == 0 )
        {
          have_accept = true;
          std::istringstream as( f.substr( 7 ) );
          std::string part;
          while ( std::getline( as, part, ',' ) )
            accept.push_back( std::stoi( part ) );
        }
        else if ( f.rfind( "w=", 0 ) == 0 )
        {
          std::istringstream ws( f.substr( 2 ) );
          std::string part;
          while ( std::getline( ws, part, ',' ) )
          {
            auto colon = part.find( ':' );
            if ( colon == std::string::npos )
              fail( "wire '" + part + "' missing ':<weight>'" );
            std::string ref_s = part.substr( 0, colon );
            bigint weight = detail::parse_bigint( part.substr( colon + 1 ), line_no );
            input_ref ref = input_ref::input( 0 );
            if ( ref_s.size() > 1 && ref_s[0] == 'x' && isdigit( static_cast<unsigned char>( ref_s[1] ) ) )
            {
              ref = input_ref::input( static_cast<uint32_t>( std::stoul( ref_s.substr( 1 ) ) ) );
            }
            else
            {
              auto it = ids.find( ref_s );
              if ( it == ids.end() )
                fail( "reference to undefined gate '" + ref_s + "'" );
              ref = input_ref::gate( it->second );
            }
            wires.push_back( { ref, std::move( weight ) } );
          }
        }
        else
        {
          fail( "unknown field '" + f + "'" );
        }
      }

      gate g;
      try
      {
        switch ( kind )
        {
        case gate_kind::ltf:
          if ( !have_t )
            fail( "LTF gate requires t=" );
          g = make_ltf( std::move( wires ), std::move( t ) );
          break;
        case gate_kind::maj:
        case gate_kind::and_gate:
        case gate_kind::or_gate:
        {
          std::vector<input_ref> refs;
          for ( auto& w : wires )
          {
            if ( w.weight != 1 )
              fail( std::string( kind_name( kind ) ) + " gate requires unit weights" );
            refs.push_back( w.ref );
          }
          g = kind == gate_kind::maj ? make_maj( refs ) : kind == gate_kind::and_gate ? make_and( refs ) : make_or( refs );
          if ( have_t && g.threshold != t )
            fail( std::string( kind_name( kind ) ) + " gate with inconsistent threshold" );
          break;
        }
        case gate_kind::mod2:
        case gate_kind::mod3:
          if ( !have_accept )
            fail( std::string( kind_name( kind ) ) + " gate requires accept=" );
          g = kind == gate_kind::mod2 ? make_mod2( std::move( wires ), std::move( accept ) )
                                      : make_mod3( std::move( wires ), std::move( accept ) );
          break;
        case gate_kind::constant:
          if ( !have_t )
            fail( "CONST gate requires t= (value is [0 >= t])" );
          if ( !wires.empty() )
            fail( "CONST gate cannot have wires" );
          g = gate{ gate_kind::constant, {}, std::move( t ), {} };
          break;
        }
      }
      catch ( const structural_error& e )
      {
        fail( e.what() );
      }
      pending.emplace_back( id, std::move( g ) );
      ids[id] = static_cast<uint32_t>( pending.size() - 1 );
    }
    else if ( toks[0] == "output" )
    {
      if ( have_output || toks.size() != 2 )
        fail( "expected single 'output <id>'" );
      output_id = toks[1];
      have_output = true;
    }
    else
    {
      fail( "unknown directive '" + toks[0] + "'" );
    }
  }

  if ( !have_name || !have_inputs || !have_output )
    throw parse_error( "incomplete circuit: need circuit/inputs/output lines" );
  auto it = ids.find( output_id );
  if ( it == ids.end() )
    throw parse_error( "output references undefined gate '" + output_id + "'" );

  circuit c( num_inputs, name );
  try
  {
    for ( auto& [id, g] : pending )
      c.add( std::move( g ) );
  }
  catch ( const structural_error& e )
  {
    throw parse_error( std::string( "invalid circuit: " ) + e.what() );
  }
  c.set_output( it->second );
  return c;
}

} // namespace ltflab
