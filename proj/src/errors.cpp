#include "viewshift/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace viewshift {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace viewshift
