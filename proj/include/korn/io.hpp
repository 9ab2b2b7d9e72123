#pragma once

#include <string>

#include "korn/fields.hpp"
#include "korn/tree.hpp"
#include "korn/whitney.hpp"

namespace korn {

/// {"kind": ..., "resolution": ..., "depth": ...}
DomainSpec parse_domain_spec(const std::string& json_text);
std::string domain_spec_json(const DomainSpec& spec);
DomainSpec read_domain_spec(const std::string& path);

/// Binary dump: occupancy, cut faces and delta, enough to rebuild the
/// domain without recomputing distances.
void write_domain(const std::string& path, const GridDomain& d);
GridDomain read_domain(const std::string& path);

/// Text bitmap (plain PBM, 1 = occupied). 3D domains stack z-slices.
void write_domain_pbm(const std::string& path, const GridDomain& d);
/// id, x, y[, z], delta
void write_cells_csv(const std::string& path, const GridDomain& d);

/// id, level, x, y[, z], side
void write_cubes_csv(const std::string& path, const WhitneyDecomposition& decomp);
/// a, b, kind (face | touch), one row per unordered pair
void write_edges_csv(const std::string& path, const WhitneyDecomposition& decomp);
/// Rebuilds cubes and neighbor lists; residual is not stored and reads as 0.
WhitneyDecomposition read_cubes_csv(const std::string& path);

/// id, parent, depth, level (parent -1 at the root)
void write_tree_csv(const std::string& path, const RootedTree& tree);
RootedTree read_tree_csv(const std::string& path);

/// cell, v1..vn
void write_field_csv(const std::string& path, const Field& u);
Field read_field_csv(const std::string& path, const GridDomain& d);

/// Shortest round-trip decimal form, so written tables are reproducible.
std::string format_double(double x);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace korn
