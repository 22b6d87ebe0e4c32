#include "drive.hpp"

#include <sstream>

namespace detworam {

TraceMeta OramDrive::trace_meta() const {
  TraceMeta m;
  m.scheme = scheme_name();
  m.block_bytes = block_bytes();
  m.num_blocks = const_cast<OramDrive*>(this)->device().num_blocks();
  std::ostringstream os;
  os << "n=" << logical_blocks() << " payload_base=" << payload_base();
  m.params = os.str();
  return m;
}

}  // namespace detworam
