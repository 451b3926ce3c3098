// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grin/errors.hpp"

namespace grin::smiles {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3 };

struct AtomNode {
  std::string element;  // one of B,C,N,O,P,S,F,Cl,Br,I,*
  int formal_charge = 0;
  int implicit_h = 0;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
};

// Parsed repeat unit: a connected molecular graph with exactly two `*`
// polymerization anchors, each of degree 1. anchor_in is the `*` with the
// smaller atom index.
struct RepeatUnit {
  std::vector<AtomNode> atoms;
  std::vector<Bond> bonds;
  int anchor_in = -1;
  int anchor_out = -1;
  std::string source_text;

  int degree(int atom) const;
  std::vector<std::vector<int>> adjacency() const;
};

// Restricted SMILES dialect: elements {B,C,N,O,P,S,F,Cl,Br,I,*}, bonds
// `-` `=` `#`, branches, ring-closure digits 1-9, bracket atoms with an
// explicit H count and a single +/- charge. Kekulized input only.
RepeatUnit parse_repeat_unit(const std::string& text);

// Same grammar without the anchor checks; anchor_in/anchor_out are -1 unless
// exactly two `*` atoms are present. Connectivity is still required.
RepeatUnit parse_molecule(const std::string& text);

// Deterministic re-serialization; re-parsing yields a graph isomorphic to
// the input with anchor roles preserved.
std::string canonical_text(const RepeatUnit& ru);

// Standard valence used for implicit-H assignment; `*` has valence 1.
int default_valence(const std::string& element);

}  // namespace grin::smiles
