from dotenv import load_dotenv
import os

load_dotenv()

LOG_LEVEL = os.getenv('FFTCONV_LOG_LEVEL', 'INFO')
LOG_FILE = os.getenv('FFTCONV_LOG_FILE')  # unset -> stderr only

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '../../'))
PLAN_CACHE_PATH = os.getenv('FFTCONV_PLAN_CACHE', os.path.join(BASE_DIR, 'cache', 'plans.tsv'))
PLAN_CACHE_HEADER = 'fftconv-plancache v1'

DEFAULT_SEED = int(os.getenv('FFTCONV_SEED', '1234'))
TIMING_REPEATS = int(os.getenv('FFTCONV_TIMING_REPEATS', '5'))
VERIFY_TRIALS = int(os.getenv('FFTCONV_VERIFY_TRIALS', '20'))
WORKERS = int(os.getenv('FFTCONV_WORKERS', '1'))

BASE_TOLERANCE = float(os.getenv('FFTCONV_BASE_TOLERANCE', '1e-3'))
MAX_FFT_SIZE = 1 << 20
SMOOTH_RADICES = (2, 3, 5, 7)

GOLDEN_MAGIC = b'FBT1'
GOLDEN_DTYPES = {0: 'real32', 1: 'complex64'}

# full evaluation grid; the desk grid below is what `bench` runs by default
GRID_DIMENSIONS = {
    'S': [1, 16, 64, 128],
    'f': [1, 4, 16, 64, 96, 128, 256],
    'fp': [1, 4, 16, 64, 96, 128, 256],
    'k': [3, 5, 7, 9, 11, 13],
    'y': [1, 2, 4, 8, 16, 32, 64],
}

DEFAULT_GRID = {
    'S': [1, 4],
    'f': [4, 16],
    'k': [3, 9],
    'y': [8, 16],
}

BENCH_METHODS = ('direct', 'fft_radix2', 'fft_smooth', 'fft_tiled')
CSV_COLUMNS = ['S', 'f', 'fp', 'h', 'w', 'kh', 'kw', 'pass', 'method', 'plan_nh', 'plan_nw',
               'time_us', 'speedup_vs_direct', 'tred_per_s', 'problem_size']
