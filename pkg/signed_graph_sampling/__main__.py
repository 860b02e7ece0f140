"""Entry point for python -m signed_graph_sampling"""
import sys

from signed_graph_sampling.cli import main

sys.exit(main())
