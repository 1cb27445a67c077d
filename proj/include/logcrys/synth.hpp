#pragma once

#include <random>

#include "logcrys/cancoord.hpp"

namespace logcrys {

/// Seed for a rank-(1+h) ordinary weight-1 crystal with g = 1: residues of the
/// tau matrix and analytic parts tau' with tau'(0) in pW and
/// psi^* tau' - p tau' in pA (checked at construction).
struct Weight1Seed {
  SeriesRingPtr ring;
  int h = 0;
  std::vector<std::vector<std::int64_t>> residues;  // h x r
  std::vector<TruncatedSeries> tau_prime;           // h series

  bool normalized_residues() const;  // residues = [I_r; 0]
};

struct SynthWeight1 {
  HodgeFCrystal X;
  std::vector<TruncatedSeries> q_expected;  // m series; set for normalized seeds with h = m
  std::vector<TruncatedSeries> tau_prime;   // the seed analytic parts
  Mat<TruncatedSeries> u_psi;               // h x 1
};

Weight1Seed random_weight1_seed(const SeriesRingPtr& ring, int h, std::mt19937_64& rng,
                                bool normalized = true, bool constant_term = true);

SynthWeight1 synth_weight1(const Weight1Seed& seed);

/// Flag-adapted random change of basis (unit block diagonal); the intrinsic
/// frame data of the crystal is unchanged.
HodgeFCrystal scramble_basis(const HodgeFCrystal& X, std::mt19937_64& rng);

/// Seed for a rank-(2m+2) ordinary Calabi-Yau-type crystal of weight 3 over a
/// chart with r = m: canonical coordinates from a weight-1 seed, a potential
/// f in W[[x]], the constant term of the Yukawa coupling and of c.
struct CY3Seed {
  Weight1Seed qseed;           // h = m, normalized residues
  TruncatedSeries potential;   // f, constant term irrelevant
  WittElem eps0;
  WittElem c0;
};

struct SynthCY3 {
  HodgeFCrystal X;                          // t-chart crystal, truncation D
  std::vector<TruncatedSeries> q_expected;  // the canonical coordinates
  // seed data in the x-chart at truncation D - 1 (the pipeline's chart):
  SeriesRingPtr xchart;
  std::vector<std::vector<std::vector<TruncatedSeries>>> kappa;  // m^3
  std::vector<TruncatedSeries> a;                                // m
  std::vector<std::vector<TruncatedSeries>> b;                   // m x m
  TruncatedSeries c;
  TruncatedSeries potential;
};

CY3Seed random_cy3_seed(const SeriesRingPtr& ring, std::mt19937_64& rng);

SynthCY3 synth_cy3(const CY3Seed& seed);

}  // namespace logcrys
