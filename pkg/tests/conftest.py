import sys
from pathlib import Path

# Make the oracle helpers importable when pytest is run from the repo root.
sys.path.insert(0, str(Path(__file__).parent))
