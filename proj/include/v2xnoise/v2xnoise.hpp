#ifndef V2XNOISE_V2XNOISE_HPP
#define V2XNOISE_V2XNOISE_HPP

#include "v2xnoise/cfas.hpp"
#include "v2xnoise/config.hpp"
#include "v2xnoise/geometry.hpp"
#include "v2xnoise/image.hpp"
#include "v2xnoise/io/calibration.hpp"
#include "v2xnoise/io/digest.hpp"
#include "v2xnoise/io/ledger.hpp"
#include "v2xnoise/io/manifest.hpp"
#include "v2xnoise/io/pcd.hpp"
#include "v2xnoise/io/png.hpp"
#include "v2xnoise/io/raster.hpp"
#include "v2xnoise/noise.hpp"
#include "v2xnoise/pipeline.hpp"
#include "v2xnoise/random.hpp"

#endif  // V2XNOISE_V2XNOISE_HPP
