#pragma once

#include "cwt.hpp"
#include "date.hpp"
#include "detect.hpp"
#include "error.hpp"
#include "ingest.hpp"
#include "matrix_io.hpp"
#include "pipeline.hpp"
#include "preprocess.hpp"
#include "render.hpp"
#include "series.hpp"
#include "spectra.hpp"
#include "wavelet.hpp"
