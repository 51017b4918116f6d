import setuptools


with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="smawalls",
    version="0.1.0",
    description="Interface energies and optimal wall shapes in smectic-A liquid crystals",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["test", "test.*"]),
    python_requires=">=3.8",
    install_requires=[
        "numpy >= 1.16.0",
        "scipy",
        "shapely",
        "pandas >= 1.5",
        "tqdm",
        "pytest",
        "hypothesis",
    ],
    entry_points={"console_scripts": ["smawalls=smawalls.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
)
