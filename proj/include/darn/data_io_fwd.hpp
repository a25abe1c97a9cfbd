#pragma once

namespace darn {
struct Dataset;
}
