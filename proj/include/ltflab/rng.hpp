#pragma once

#include <cstdint>
#include <vector>

namespace ltflab
{

/*! \brief Splittable deterministic PRNG (splitmix64 core).
 *
 * Each (seed, stream) pair yields an independent sequence. Monte Carlo
 * drivers use the trial index as the stream, so per-trial randomness does
 * not depend on scheduling or worker count, and results are reproducible
 * across platforms (no std::*_distribution involved).
 */
class split_rng
{
public:
  explicit split_rng( uint64_t seed, uint64_t stream = 0 )
  {
    state_ = mix( mix( seed + 0x9E3779B97F4A7C15ull ) ^ mix( stream + 0xD1B54A32D192ED03ull ) );
  }

  uint64_t next()
  {
    uint64_t z = ( state_ += 0x9E3779B97F4A7C15ull );
    z = ( z ^ ( z >> 30 ) ) * 0xBF58476D1CE4E5B9ull;
    z = ( z ^ ( z >> 27 ) ) * 0x94D049BB133111EBull;
    return z ^ ( z >> 31 );
  }

  /*! \brief Uniform draw from [0, bound), bound > 0; unbiased via rejection. */
  uint64_t below( uint64_t bound )
  {
    uint64_t threshold = ( 0 - bound ) % bound;
    for ( ;; )
    {
      uint64_t r = next();
      if ( r >= threshold )
        return r % bound;
    }
  }

  bool coin()
  {
    return next() >> 63;
  }

  /*! \brief Fills words with random bits; the tail beyond n_bits is cleared. */
  void fill_bits( std::vector<uint64_t>& words, uint64_t n_bits )
  {
    uint64_t n_words = ( n_bits + 63 ) / 64;
    words.resize( n_words );
    for ( uint64_t w = 0; w < n_words; ++w )
      words[w] = next();
    if ( n_bits % 64 )
      words[n_words - 1] &= ( 1ull << ( n_bits % 64 ) ) - 1;
  }

private:
  static uint64_t mix( uint64_t z )
  {
    z = ( z ^ ( z >> 30 ) ) * 0xBF58476D1CE4E5B9ull;
    z = ( z ^ ( z >> 27 ) ) * 0x94D049BB133111EBull;
    return z ^ ( z >> 31 );
  }

  uint64_t state_;
};

} // namespace ltflab
