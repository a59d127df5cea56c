#pragma once

#include <string>
#include <string_view>

#include "duo/circuit.hpp"
#include "duo/theory.hpp"

// Text notation for fragments. A term is an apparatus id with an optional
// [outcome] suffix, inputs after `_` and outputs after `^`:
//
//   A^{a1 c2 a3} B_{a1 a4}^{b6} C[+]_{c2 a3}^{a4 d5} D_{b6 d5}
//
// A label is letters (the wire type) followed by digits. A label used as an
// output and an input becomes a wire; one used once is an open port. `!`
// before a label closes that port with the standard device. A single label
// may drop the braces (`_!a2`, `^b6`). `#` starts a comment.
namespace duo::dsl {

/// Errors: LexError, DuplicateProducer, TripleUse, CycleError, and TypeClash
/// when `theory` is given and a term's port types disagree with the
/// declared apparatus.
Fragment parse(std::string_view src, const Theory* theory = nullptr);

/// Canonical text: terms in topological order (ties by instance id), labels
/// numbered in order of appearance, closures written with `!`.
/// Errors: FormatError when an id, outcome or type name has no spelling.
std::string format(const Fragment& f);

/// Graphviz digraph: one box per instance, edges labelled by type, open
/// ports as point nodes joined by dashed edges. With a foliation, the
/// instances of each slab share a rank.
std::string export_dot(const Fragment& f, const Foliation* foliation = nullptr);

}  // namespace duo::dsl
