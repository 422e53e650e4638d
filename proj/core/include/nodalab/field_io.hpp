#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nodalab/fields.hpp"

namespace nodalab {

/// Snapshot format:
///   # grid=<kind>,nx=..,ny=..,<extra grid parameters>,tag=<tag>
///   i,j,x,y,value
///   ...
/// Values are printed with 17 significant digits so a round trip through
/// read_field_csv reproduces them bit for bit. Disk grids write the center
/// as (0, 0) followed by rings 1..rings; nx counts rings and ny angles.
void write_field_csv(std::ostream& out, const ScalarField& field);
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);

ScalarField read_field_csv(std::istream& in);
ScalarField read_field_csv(const std::filesystem::path& path);

const char* tag_name(FieldTag tag);
FieldTag parse_tag(const std::string& name);

}  // namespace nodalab
