import setuptools
import shutil
from tracest.version import __version__

print(f"Building tracest version {__version__}")

print("Cleaning old builds")

shutil.rmtree("./build/", ignore_errors=True)
shutil.rmtree("./dist/", ignore_errors=True)
shutil.rmtree("./tracest.egg-info/", ignore_errors=True)

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="tracest",
    version=__version__,
    description="Matrix-free stochastic trace estimation with sample-size bounds and experiments.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=["tracest", "tracest.shortcuts", "tracest.examples"],
    package_data={"": ["README.md"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "Framework :: Matplotlib",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=["matplotlib>=3.3", "numpy>=1.18.1", "scipy>=1.5"],
    extras_require={"test": ["pytest>=6"]},
    entry_points={"console_scripts": ["tracest=tracest.cli:main"]},
)
