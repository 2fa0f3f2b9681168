#ifndef MIC_MIC_HPP
#define MIC_MIC_HPP

#include "mic/core.hpp"
#include "mic/declaration.hpp"
#include "mic/errors.hpp"
#include "mic/icl.hpp"
#include "mic/ingest.hpp"
#include "mic/interconnect.hpp"
#include "mic/layout.hpp"
#include "mic/manifest.hpp"
#include "mic/mixer.hpp"
#include "mic/pipeline.hpp"
#include "mic/rng.hpp"
#include "mic/serialize.hpp"
#include "mic/templates.hpp"
#include "mic/text.hpp"

#endif  // MIC_MIC_HPP
