"""
Console output helpers built on colorama.

Status lines go to stdout, warnings and errors to stderr so JSON written to
stdout stays machine readable.
"""

import os
import sys
from typing import List, Tuple

from colorama import Fore, Style, init

# Strips codes when the stream is not a terminal or NO_COLOR is set
init(autoreset=True, strip=True if os.environ.get("NO_COLOR") else None)

COMMANDS_INFO: List[Tuple[str, str, str]] = [
    ("bounds", "Rigorous lower bounds (A_N, C_N, mu_N, Lambda chain)",
     "python cli.py bounds --gamma 0.5 --N 100"),
    ("products", "Infinite / truncated product evaluation",
     "python cli.py products --demo uniform-factor"),
    ("spectrum", "Exact Maxwellian (gamma=0) spectrum on symmetric polynomials",
     "python cli.py spectrum --gamma 0 --N 4 --degree 4"),
    ("variational", "Rayleigh upper bound on the restricted gap, linearized gap",
     "python cli.py variational --gamma 0.5 --N 10 --degree 8"),
    ("simulate", "Monte Carlo Kac walk and autocorrelation gap fit",
     "python cli.py simulate --gamma 0 --N 6 --replicas 2000 --seed 7"),
    ("correlation", "Correlation operator spectra and near-independence bounds",
     "python cli.py correlation --N 10 --m 1 --order 1"),
    ("report", "Sandwich table for a grid of N",
     "python cli.py report --gamma 0.5 --N 4 8 16"),
]


def info(message: str) -> None:
    """Print a neutral status line."""
    print(f"{Fore.CYAN}{message}{Style.RESET_ALL}")


def success(message: str) -> None:
    """Print a success line."""
    print(f"{Fore.GREEN}{message}{Style.RESET_ALL}")


def warn(message: str) -> None:
    """Print a warning on stderr."""
    print(f"{Fore.YELLOW}warning: {message}{Style.RESET_ALL}", file=sys.stderr)


def error(message: str) -> None:
    """Print an error on stderr."""
    print(f"{Fore.RED}error: {message}{Style.RESET_ALL}", file=sys.stderr)


def print_banner() -> None:
    """Print the application banner."""
    print(f"\n{Fore.CYAN}{'=' * 70}{Style.RESET_ALL}")
    print(f"{Fore.YELLOW}{'KacGap: spectral gaps of the Kac walk'.center(70)}{Style.RESET_ALL}")
    print(f"{Fore.CYAN}{'=' * 70}{Style.RESET_ALL}\n")


def print_command_table() -> None:
    """Print the available commands with one example each."""
    print_banner()
    print(f"{Fore.GREEN}Available Commands:{Style.RESET_ALL}\n")

    for cmd, desc, example in COMMANDS_INFO:
        print(f"  {Fore.GREEN}{cmd:<12}{Style.RESET_ALL} - {desc}")
        print(f"    {Fore.WHITE}Example: {example}{Style.RESET_ALL}\n")

    print(f"{Fore.CYAN}{'=' * 70}{Style.RESET_ALL}")
    print(f"{Fore.YELLOW}Note:{Style.RESET_ALL} Use 'python cli.py <command> --help' for detailed help on each command.\n")
