#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "gf2.hpp"
#include "rng.hpp"

namespace ltflab
{

/*! \brief Small-bias generator matrix over GF(2) from the powering
 * construction: m = 2^{2r} rows indexed by field pairs (alpha, beta), column
 * i of row (alpha, beta) is the GF(2) inner product of the bit
 * representations of alpha^i and beta. The bias of the row set against any
 * nonzero linear test is at most (t-1)/2^r.
 *
 * Row index packing: alpha occupies the high r bits, beta the low r bits, so
 * row bin(z)-1 for an address z read most-significant-bit-first matches the
 * multiplexer convention.
 */
class biased_matrix
{
public:
  static constexpr unsigned max_columns = 64;
  static constexpr unsigned max_materialized_degree = 11; // m = 2^{2r} rows kept in memory

  static biased_matrix build( unsigned t, unsigned r )
  {
    if ( t < 1 || t > max_columns )
      throw structural_error( "biased_matrix: need 1 <= t <= 64" );
    if ( r < binary_field::min_degree || r > binary_field::max_degree )
      throw structural_error( "biased_matrix: need 2 <= r <= 16" );
    if ( r > max_materialized_degree )
      throw capacity_error( "biased_matrix: 2^" + std::to_string( 2 * r ) + " rows exceed materialization capacity" );

    biased_matrix A( t, r );
    uint64_t half = uint64_t( 1 ) << r;
    std::vector<uint32_t> powers( t );
    A.rows_.assign( A.m_, 0 );
    for ( uint64_t alpha = 0; alpha < half; ++alpha )
    {
      uint32_t p = 1;
      for ( unsigned i = 0; i < t; ++i )
      {
        powers[i] = p;
        p = A.field_.mul( p, static_cast<uint32_t>( alpha ) );
      }
      // column i flips with beta bit j iff alpha^i has bit j
      std::vector<uint64_t> flip( r, 0 );
      for ( unsigned i = 0; i < t; ++i )
        for ( unsigned j = 0; j < r; ++j )
          if ( ( powers[i] >> j ) & 1 )
            flip[j] |= uint64_t( 1 ) << i;
      uint64_t row = 0; // row at beta = 0 is all zeros
      uint64_t beta = 0;
      A.rows_[( alpha << r ) | 0] = 0;
      for ( uint64_t step = 1; step < half; ++step )
      {
        uint64_t g = step ^ ( step >> 1 );
        unsigned j = static_cast<unsigned>( std::countr_zero( step ) );
        beta = g;
        row ^= flip[j];
        A.rows_[( alpha << r ) | beta] = row;
      }
    }
    return A;
  }

  unsigned t() const { return t_; }
  unsigned r() const { return r_; }
  uint64_t m() const { return m_; }
  const binary_field& field() const { return field_; }

  /*! \brief Declared bias bound (t-1)/2^r as an exact fraction. */
  std::pair<uint64_t, uint64_t> bias_bound() const { return { t_ - 1, uint64_t( 1 ) << r_ }; }

  uint64_t row( uint64_t index ) const { return rows_[index]; }
  const std::vector<uint64_t>& rows() const { return rows_; }

  /*! \brief Codeword bit (Ax)_row computed lazily: only the requested row is
   * touched. */
  bool codeword_bit( uint64_t row_index, uint64_t x_bits ) const
  {
    return std::popcount( rows_[row_index] & x_bits ) & 1;
  }

  /*! \brief Full codeword Ax as packed bits (m bits). */
  std::vector<uint64_t> codeword( uint64_t x_bits ) const
  {
    std::vector<uint64_t> cw( ( m_ + 63 ) / 64, 0 );
    for ( uint64_t i = 0; i < m_; ++i )
      if ( std::popcount( rows_[i] & x_bits ) & 1 )
        cw[i >> 6] |= uint64_t( 1 ) << ( i & 63 );
    return cw;
  }

  /*! \brief Textual export: header then one hex row per line (column 0 in
   * the high bit of the first nibble, matching the truth-table convention). */
  std::string serialize() const
  {
    std::ostringstream os;
    os << "biased t=" << t_ << " r=" << r_ << " m=" << m_ << " poly=" << std::hex << field_.modulus() << std::dec
       << "\n";
    unsigned digits = ( t_ + 3 ) / 4;
    static const char* hexd = "0123456789abcdef";
    for ( uint64_t i = 0; i < m_; ++i )
    {
      std::string line( digits, '0' );
      for ( unsigned d = 0; d < digits; ++d )
      {
        unsigned v = 0;
        for ( unsigned b = 0; b < 4; ++b )
        {
          unsigned col = 4 * d + b;
          if ( col < t_ && ( ( rows_[i] >> col ) & 1 ) )
            v |= 8u >> b;
        }
        line[d] = hexd[v];
      }
      os << line << "\n";
    }
    return os.str();
  }

private:
  biased_matrix( unsigned t, unsigned r )
      : t_( t ), r_( r ), m_( uint64_t( 1 ) << ( 2 * r ) ), field_( r )
  {
  }

  unsigned t_, r_;
  uint64_t m_;
  binary_field field_;
  std::vector<uint64_t> rows_;
};

/*! \brief Maximum deviation of any tested linear test from balance, exact. */
struct bias_result
{
  uint64_t deviation = 0; // max over v of |2 * #{rows with <row,v> = 1} - m|
  uint64_t m = 0;
  uint64_t worst_v = 0;

  double value() const { return double( deviation ) / ( 2.0 * double( m ) ); }

  /*! \brief Exact comparison: bias <= num/den. */
  bool at_most( uint64_t num, uint64_t den ) const
  {
    return bigint( deviation ) * den <= bigint( 2 ) * m * num;
  }
};

namespace detail
{

inline void bias_account( bias_result& best, uint64_t ones, uint64_t m, uint64_t v )
{
  uint64_t dev = ones * 2 >= m ? ones * 2 - m : m - ones * 2;
  if ( dev > best.deviation )
  {
    best.deviation = dev;
    best.worst_v = v;
  }
}

} // namespace detail

/*! \brief Exact max bias of a row set over all 2^t - 1 nonzero tests
 * (t <= 20). Accepts any row set, not just built matrices. */
inline bias_result bias_of_exhaustive( const std::vector<uint64_t>& rows, unsigned t )
{
  if ( t > 20 )
    throw capacity_error( "bias_of: exhaustive mode needs t <= 20" );
  bias_result best{ 0, rows.size(), 0 };
  for ( uint64_t v = 1; v < ( uint64_t( 1 ) << t ); ++v )
  {
    uint64_t ones = 0;
    for ( uint64_t row : rows )
      ones += std::popcount( row & v ) & 1;
    detail::bias_account( best, ones, rows.size(), v );
  }
  return best;
}

inline bias_result bias_of_exhaustive( const biased_matrix& A )
{
  return bias_of_exhaustive( A.rows(), A.t() );
}

/*! \brief Max bias over sampled nonzero tests; a lower bound on the
 * exhaustive maximum. */
inline bias_result bias_of_sampled( const std::vector<uint64_t>& rows, unsigned t, uint64_t v_count, uint64_t seed )
{
  bias_result best{ 0, rows.size(), 0 };
  split_rng rng( seed );
  uint64_t space = ( uint64_t( 1 ) << t ) - 1;
  for ( uint64_t s = 0; s < v_count; ++s )
  {
    uint64_t v = 1 + rng.below( space );
    uint64_t ones = 0;
    for ( uint64_t row : rows )
      ones += std::popcount( row & v ) & 1;
    detail::bias_account( best, ones, rows.size(), v );
  }
  return best;
}

inline bias_result bias_of_sampled( const biased_matrix& A, uint64_t v_count, uint64_t seed )
{
  return bias_of_sampled( A.rows(), A.t(), v_count, seed );
}

/*! \brief F(z, x) = bit bin(z) of the codeword Ax; z is the row address with
 * its first coordinate most significant. */
inline bool f_eval( const biased_matrix& A, const std::vector<uint8_t>& z, uint64_t x_bits )
{
  if ( z.size() != 2 * A.r() )
    throw structural_error( "f_eval: |z| must equal log2(m)" );
  uint64_t row = 0;
  for ( uint8_t b : z )
    row = ( row << 1 ) | ( b ? 1 : 0 );
  return A.codeword_bit( row, x_bits );
}

inline bool f_eval_row( const biased_matrix& A, uint64_t row_index, uint64_t x_bits )
{
  return A.codeword_bit( row_index, x_bits );
}

/*! \brief The 2n-bit function B_{n,k}: block parities of a select a codeword
 * bit of x through the small-bias matrix (t = n columns, r = k/2). */
class b_function
{
public:
  b_function( uint32_t n, uint32_t k )
      : n_( n ), k_( k ), A_( biased_matrix::build( n, require_params( n, k ) ) )
  {
    uint32_t block = n_ / k_;
    for ( uint32_t i = 0; i < k_; ++i )
    {
      uint64_t mask = 0;
      for ( uint32_t j = 0; j < block; ++j )
        mask |= uint64_t( 1 ) << ( uint64_t( i ) * block + j );
      block_masks_.push_back( mask );
    }
  }

  uint32_t n() const { return n_; }
  uint32_t k() const { return k_; }
  const biased_matrix& matrix() const { return A_; }

  /*! \brief Row index selected by the block parities of a (z_1 is the most
   * significant address bit). */
  uint64_t address_row( uint64_t a_bits ) const
  {
    uint64_t row = 0;
    for ( uint32_t i = 0; i < k_; ++i )
      row = ( row << 1 ) | ( std::popcount( a_bits & block_masks_[i] ) & 1u );
    return row;
  }

  bool eval( uint64_t x_bits, uint64_t a_bits ) const
  {
    return A_.codeword_bit( address_row( a_bits ), x_bits );
  }

  /*! \brief Packed 2n-bit input: x in the low n bits, a in the next n. */
  bool eval_packed( uint64_t xa_bits ) const
  {
    uint64_t mask = n_ == 64 ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << n_ ) - 1 );
    return eval( xa_bits & mask, ( xa_bits >> n_ ) & mask );
  }

private:
  static uint32_t require_params( uint32_t n, uint32_t k )
  {
    if ( k == 0 || k % 2 != 0 || n % k != 0 )
      throw structural_error( "b_function: need even k dividing n" );
    return k / 2;
  }

  uint32_t n_, k_;
  biased_matrix A_;
  std::vector<uint64_t> block_masks_;
};

/*! \brief Count of nonzero x whose codeword agrees with T on a fraction
 * deviating from 1/2 by more than theta. */
struct profile_result
{
  uint64_t exceeders = 0;
  uint64_t max_deviation = 0; // max over x of |2*agreements - m|
  uint64_t tested = 0;
};

namespace detail
{

inline std::vector<std::vector<uint64_t>> matrix_columns( const biased_matrix& A )
{
  size_t words = ( A.m() + 63 ) / 64;
  std::vector<std::vector<uint64_t>> cols( A.t(), std::vector<uint64_t>( words, 0 ) );
  for ( uint64_t i = 0; i < A.m(); ++i )
  {
    uint64_t row = A.row( i );
    while ( row )
    {
      unsigned c = static_cast<unsigned>( std::countr_zero( row ) );
      cols[c][i >> 6] |= uint64_t( 1 ) << ( i & 63 );
      row &= row - 1;
    }
  }
  return cols;
}

inline void profile_account( profile_result& pr, uint64_t agreements, uint64_t m, double theta )
{
  uint64_t dev = agreements * 2 >= m ? agreements * 2 - m : m - agreements * 2;
  pr.max_deviation = std::max( pr.max_deviation, dev );
  // |agr/m - 1/2| > theta  <=>  dev > 2*m*theta
  if ( static_cast<long double>( dev ) > 2.0L * static_cast<long double>( m ) * theta )
    ++pr.exceeders;
  ++pr.tested;
}

} // namespace detail

/*! \brief Exhaustive correlation profile over all nonzero x (t <= 20);
 * codewords are walked in Gray order, one column flip per step. */
inline profile_result correlation_profile_exhaustive( const biased_matrix& A, const std::vector<uint64_t>& T,
                                                      double theta )
{
  if ( A.t() > 20 )
    throw capacity_error( "correlation_profile: exhaustive mode needs t <= 20" );
  size_t words = ( A.m() + 63 ) / 64;
  if ( T.size() != words )
    throw structural_error( "correlation_profile: T must have m bits" );
  auto cols = detail::matrix_columns( A );

  profile_result pr;
  std::vector<uint64_t> cw( words, 0 );
  uint64_t tail_mask = ( A.m() % 64 ) ? ( ( uint64_t( 1 ) << ( A.m() % 64 ) ) - 1 ) : ~uint64_t( 0 );
  for ( uint64_t step = 1; step < ( uint64_t( 1 ) << A.t() ); ++step )
  {
    unsigned c = static_cast<unsigned>( std::countr_zero( step ) );
    for ( size_t w = 0; w < words; ++w )
      cw[w] ^= cols[c][w];
    uint64_t diff = 0;
    for ( size_t w = 0; w < words; ++w )
      diff += std::popcount( ( cw[w] ^ T[w] ) & ( w + 1 == words ? tail_mask : ~uint64_t( 0 ) ) );
    detail::profile_account( pr, A.m() - diff, A.m(), theta );
  }
  return pr;
}

inline profile_result correlation_profile_sampled( const biased_matrix& A, const std::vector<uint64_t>& T,
                                                   double theta, uint64_t count, uint64_t seed )
{
  size_t words = ( A.m() + 63 ) / 64;
  if ( T.size() != words )
    throw structural_error( "correlation_profile: T must have m bits" );
  uint64_t tail_mask = ( A.m() % 64 ) ? ( ( uint64_t( 1 ) << ( A.m() % 64 ) ) - 1 ) : ~uint64_t( 0 );
  split_rng rng( seed );
  profile_result pr;
  uint64_t space = ( uint64_t( 1 ) << A.t() ) - 1;
  for ( uint64_t s = 0; s < count; ++s )
  {
    uint64_t x = 1 + rng.below( space );
    auto cw = A.codeword( x );
    uint64_t diff = 0;
    for ( size_t w = 0; w < words; ++w )
      diff += std::popcount( ( cw[w] ^ T[w] ) & ( w + 1 == words ? tail_mask : ~uint64_t( 0 ) ) );
    detail::profile_account( pr, A.m() - diff, A.m(), theta );
  }
  return pr;
}

} // namespace ltflab
