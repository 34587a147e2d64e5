#pragma once

// Umbrella header for the whole library.

#include "usdeid/components.hpp"
#include "usdeid/config.hpp"
#include "usdeid/csv.hpp"
#include "usdeid/ctc.hpp"
#include "usdeid/dicom.hpp"
#include "usdeid/error.hpp"
#include "usdeid/font5x7.hpp"
#include "usdeid/imgbuf.hpp"
#include "usdeid/ingest.hpp"
#include "usdeid/keyvalue.hpp"
#include "usdeid/metrics.hpp"
#include "usdeid/pipeline.hpp"
#include "usdeid/png_io.hpp"
#include "usdeid/pnm.hpp"
#include "usdeid/roi.hpp"
#include "usdeid/synth.hpp"
#include "usdeid/textmask.hpp"
