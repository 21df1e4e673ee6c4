/*
 * transition_file.cpp
 *
 * text writer for successor boxes
 */
#include <sstream>

#include "gridabs/abstraction.hpp"
#include "gridabs/errors.hpp"

namespace gridabs {

std::string transition_header(const UniformGrid& grid, std::size_t inputs) {
  std::ostringstream os;
  os << "gridabs-trans v1 n=" << grid.dimension() << " m=";
  for (std::size_t i = 0; i < grid.counts().size(); ++i) os << (i ? "," : "") << grid.counts()[i];
  os << " inputs=" << inputs << '\n';
  return os.str();
}

std::string transition_record(std::uint64_t cell, std::size_t input, const SuccessorBox& box) {
  std::ostringstream os;
  os << cell << ',' << input;
  for (auto v : box.lo) os << ',' << v;
  for (auto v : box.hi) os << ',' << v;
  os << ',' << box.wrapped_mask << '\n';
  return os.str();
}

TransitionFileWriter::TransitionFileWriter(const std::string& path, const UniformGrid& grid,
                                           std::size_t inputs)
    : out_(path, std::ios::out | std::ios::trunc | std::ios::binary), path_(path) {
  if (!out_) throw IoError("cannot open transition file '" + path + "' for writing");
  const std::string header = transition_header(grid, inputs);
  out_ << header;
  bytes_ += header.size();
  if (!out_) throw IoError("write to '" + path_ + "' failed");
}

TransitionFileWriter::~TransitionFileWriter() {
  if (out_.is_open()) out_.close();
}

void TransitionFileWriter::write(std::uint64_t cell, std::size_t input, const SuccessorBox& box) {
  if (box.status == BoxStatus::overflow) return;
  const std::string rec = transition_record(cell, input, box);
  out_ << rec;
  bytes_ += rec.size();
  if (!out_) throw IoError("write to '" + path_ + "' failed");
}

void TransitionFileWriter::close() {
  if (!out_.is_open()) return;
  out_.flush();
  const bool ok = static_cast<bool>(out_);
  out_.close();
  if (!ok || out_.fail()) throw IoError("closing '" + path_ + "' failed");
}

}  // namespace gridabs
