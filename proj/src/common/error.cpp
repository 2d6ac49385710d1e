#include "mfgan/common/error.hpp"

namespace mfgan {

ParseError::ParseError(std::string section, std::size_t offset, const std::string& what)
    : Error("parse error in section '" + section + "' at byte " + std::to_string(offset) + ": " +
            what),
      section_(std::move(section)),
      offset_(offset) {}

}  // namespace mfgan
