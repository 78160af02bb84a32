#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

inline std::string readProgram(const std::string& name) {
  std::ifstream in(std::string(WELDMILL_PROGRAMS_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing program " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
