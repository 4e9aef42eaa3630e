#include "pmdata/errors.hpp"

namespace pmdata {

UnknownBlock::UnknownBlock(unsigned long long block)
    : Error("unknown block " + std::to_string(block)), block_(block) {}

}  // namespace pmdata
