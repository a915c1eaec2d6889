from setuptools import setup, find_packages

setup(
    name="lfpp-lab",
    version="0.1.0",
    packages=find_packages(include=["lfpp", "lfpp.*"]),
    package_data={"lfpp": ["templates/*.j2"]},
    install_requires=[
        "click>=8.1.0",
        "rich>=13.0.0",        # Terminal output, logging, progress
        "pyyaml>=6.0",
        "jinja2>=3.1.0",       # SVG figure templates
        "pydantic>=2.0.0",     # Config and record validation
        "numpy>=1.24.0",
        "scipy>=1.11.0",       # FFT/DST synthesis, regression
        "pandas>=2.0.0",       # CSV tables and record grouping
    ],
    entry_points={
        "console_scripts": [
            "lfpp=lfpp.cli:cli",
        ],
    },
    python_requires=">=3.10",
    author="Josh Coleman",
    description="LFPP Lab - simulate Liouville first passage percolation and evaluate its exponent bounds",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
)
