#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ltflab
{

/*! \brief Bit-packed function table over all 2^n assignments.
 *
 * Row i holds the output on the assignment whose bits are the binary
 * expansion of i with x_0 as the least significant bit. This ordering is
 * fixed; every serialization and cross-construction comparison relies on it.
 */
class truth_table
{
public:
  static constexpr uint32_t max_inputs = 28;

  explicit truth_table( uint32_t num_inputs )
      : num_inputs_( num_inputs )
  {
    if ( num_inputs > max_inputs )
      throw capacity_error( "truth_table: " + std::to_string( num_inputs ) + " inputs exceeds the 2^" +
                            std::to_string( max_inputs ) + "-row capacity" );
    words_.assign( word_count(), 0 );
  }

  uint32_t num_inputs() const { return num_inputs_; }
  uint64_t num_rows() const { return uint64_t( 1 ) << num_inputs_; }

  bool get( uint64_t row ) const
  {
    return ( words_[row >> 6] >> ( row & 63 ) ) & 1;
  }

  void set( uint64_t row, bool value )
  {
    uint64_t mask = uint64_t( 1 ) << ( row & 63 );
    if ( value )
      words_[row >> 6] |= mask;
    else
      words_[row >> 6] &= ~mask;
  }

  /*! \brief Number of rows on which the function outputs 1. */
  uint64_t count_ones() const
  {
    uint64_t c = 0;
    for ( uint64_t w : words_ )
      c += std::popcount( w );
    return c;
  }

  /*! \brief Number of rows on which two tables agree. */
  uint64_t agreement_count( const truth_table& other ) const
  {
    if ( other.num_inputs_ != num_inputs_ )
      throw structural_error( "truth_table: agreement over mismatched input counts" );
    uint64_t agree = 0;
    for ( size_t w = 0; w < words_.size(); ++w )
      agree += std::popcount( ~( words_[w] ^ other.words_[w] ) & word_mask( w ) );
    return agree;
  }

  bool operator==( const truth_table& other ) const
  {
    return num_inputs_ == other.num_inputs_ && words_ == other.words_;
  }

  /*! \brief Lowercase hex export, row 0 first.
   *
   * The table is read as a binary string row 0 leftmost; each hex digit packs
   * four consecutive rows with the earliest row in the high bit of the nibble.
   * Tables with fewer than four rows are zero-padded at the end.
   */
  std::string to_hex() const
  {
    static const char* digits = "0123456789abcdef";
    uint64_t rows = num_rows();
    uint64_t n_digits = ( rows + 3 ) / 4;
    std::string s( n_digits, '0' );
    for ( uint64_t d = 0; d < n_digits; ++d )
    {
      unsigned v = 0;
      for ( unsigned b = 0; b < 4; ++b )
      {
        uint64_t row = 4 * d + b;
        if ( row < rows && get( row ) )
          v |= 8u >> b;
      }
      s[d] = digits[v];
    }
    return s;
  }

  static truth_table from_hex( uint32_t num_inputs, const std::string& hex )
  {
    truth_table tt( num_inputs );
    uint64_t rows = tt.num_rows();
    uint64_t n_digits = ( rows + 3 ) / 4;
    if ( hex.size() != n_digits )
      throw parse_error( "truth_table: hex string has wrong length" );
    for ( uint64_t d = 0; d < n_digits; ++d )
    {
      char c = hex[d];
      unsigned v;
      if ( c >= '0' && c <= '9' )
        v = c - '0';
      else if ( c >= 'a' && c <= 'f' )
        v = 10 + ( c - 'a' );
      else
        throw parse_error( "truth_table: invalid hex digit" );
      for ( unsigned b = 0; b < 4; ++b )
      {
        uint64_t row = 4 * d + b;
        if ( row < rows )
          tt.set( row, ( v >> ( 3 - b ) ) & 1 );
      }
    }
    return tt;
  }

  /*! \brief Raw 64-row blocks; block b covers rows [64b, 64b+64). */
  std::vector<uint64_t>& words() { return words_; }
  const std::vector<uint64_t>& words() const { return words_; }

  /*! \brief Valid-bit mask of word w (tables with n < 6 use a partial word). */
  uint64_t word_mask( size_t w ) const
  {
    uint64_t rows = num_rows();
    if ( ( w + 1 ) * 64 <= rows )
      return ~uint64_t( 0 );
    return ( uint64_t( 1 ) << ( rows & 63 ) ) - 1;
  }

private:
  size_t word_count() const { return size_t( ( num_rows() + 63 ) / 64 ); }

  uint32_t num_inputs_;
  std::vector<uint64_t> words_;
};

} // namespace ltflab
