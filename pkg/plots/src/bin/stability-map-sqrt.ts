import { parseArgs } from "../csv";
import { renderStabilityMap } from "../stability-map";

const { csv, out } = parseArgs(process.argv.slice(2));
renderStabilityMap(csv, out, "sqrt");
console.log(`wrote ${out}`);
